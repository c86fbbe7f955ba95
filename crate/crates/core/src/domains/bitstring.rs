use rand::{Rng, RngCore};
use serde::Deserialize;

use super::{Domain, DomainDescriptor, DomainError, Phenotype, Raster, VariationState, BITSTRING_ID};

pub const BITSTRING_LEN: usize = 64;
const GRID: u32 = 8;

/// Reference domain: 64-bit strings, rendered as an 8x8 grid.
///
/// Blob form is `{"bits":"0101..."}`. Fitness is the number of `1` bits.
#[derive(Debug, Clone, Copy, Default)]
pub struct BitstringDomain;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Blob {
    bits: String,
}

impl BitstringDomain {
    pub fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            domain_id: BITSTRING_ID.into(),
            display_name: "Bitstring".into(),
            phenotype: Phenotype::GrayscaleRaster,
            default_render_size: (64, 64),
        }
    }

    pub fn encode(bits: &[bool]) -> String {
        let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        format!(r#"{{"bits":"{s}"}}"#)
    }

    pub fn decode(blob: &str) -> Result<Vec<bool>, DomainError> {
        let invalid = |m: &str| DomainError::InvalidGenome(m.to_string());
        let parsed: Blob = serde_json::from_str(blob).map_err(|e| DomainError::InvalidGenome(e.to_string()))?;
        if parsed.bits.len() != BITSTRING_LEN {
            return Err(invalid("bits must have length 64"));
        }
        let bits = parsed
            .bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(invalid("bits may only contain '0' and '1'")),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        if BitstringDomain::encode(&bits) != blob {
            return Err(invalid("genome is not in canonical form"));
        }
        Ok(bits)
    }
}

impl Domain for BitstringDomain {
    fn validate(&self, blob: &str) -> Result<(), DomainError> {
        BitstringDomain::decode(blob).map(|_| ())
    }

    fn random_seed(&self, rng: &mut dyn RngCore) -> String {
        let bits: Vec<bool> = (0..BITSTRING_LEN).map(|_| rng.random_bool(0.5)).collect();
        BitstringDomain::encode(&bits)
    }

    fn mutate(&self, blob: &str, _state: &mut VariationState, rng: &mut dyn RngCore) -> Result<String, DomainError> {
        let p = 1.0 / BITSTRING_LEN as f64;
        let bits: Vec<bool> = BitstringDomain::decode(blob)?
            .into_iter()
            .map(|b| b ^ rng.random_bool(p))
            .collect();
        Ok(BitstringDomain::encode(&bits))
    }

    fn crossover(
        &self,
        a: &str,
        b: &str,
        _state: &mut VariationState,
        rng: &mut dyn RngCore,
    ) -> Result<String, DomainError> {
        let (a, b) = (BitstringDomain::decode(a)?, BitstringDomain::decode(b)?);
        let bits: Vec<bool> = a
            .into_iter()
            .zip(b)
            .map(|(x, y)| if rng.random_bool(0.5) { x } else { y })
            .collect();
        Ok(BitstringDomain::encode(&bits))
    }

    fn render(&self, blob: &str, width: u32, height: u32) -> Result<Raster, DomainError> {
        if width == 0 || height == 0 {
            return Err(DomainError::InvalidSize(width, height));
        }
        let bits = BitstringDomain::decode(blob)?;
        Ok(Raster::from_fn(width, height, |i, j| {
            let col = (u64::from(i) * u64::from(GRID) / u64::from(width)) as usize;
            let row = (u64::from(j) * u64::from(GRID) / u64::from(height)) as usize;
            if bits[row * GRID as usize + col] {
                255
            } else {
                0
            }
        }))
    }

    fn fitness(&self, blob: &str) -> Option<f64> {
        BitstringDomain::decode(blob)
            .ok()
            .map(|bits| bits.iter().filter(|&&b| b).count() as f64)
    }
}
