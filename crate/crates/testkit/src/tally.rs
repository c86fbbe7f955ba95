use std::sync::Arc;

use rand::{Rng, RngCore};
use win_core::domains::{Domain, DomainDescriptor, DomainError, DomainRegistry, Phenotype, Raster, VariationState};

pub const TALLY_ID: &str = "tally";

/// A toy third domain: the genome is a decimal integer in `0..1000`, written
/// without leading zeros. Mutation nudges it by one, crossover averages.
pub struct TallyDomain;

impl TallyDomain {
    pub fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            domain_id: TALLY_ID.into(),
            display_name: "Tally".into(),
            phenotype: Phenotype::GrayscaleRaster,
            default_render_size: (4, 4),
        }
    }

    fn decode(blob: &str) -> Result<u32, DomainError> {
        let n: u32 = blob.parse().map_err(|_| DomainError::InvalidGenome(format!("{blob:?} is not a number")))?;
        if n >= 1000 || n.to_string() != blob {
            return Err(DomainError::InvalidGenome(format!("{blob:?} is not canonical in 0..1000")));
        }
        Ok(n)
    }
}

impl Domain for TallyDomain {
    fn validate(&self, blob: &str) -> Result<(), DomainError> {
        TallyDomain::decode(blob).map(|_| ())
    }

    fn random_seed(&self, rng: &mut dyn RngCore) -> String {
        rng.random_range(0..1000u32).to_string()
    }

    fn mutate(&self, blob: &str, _state: &mut VariationState, rng: &mut dyn RngCore) -> Result<String, DomainError> {
        let n = TallyDomain::decode(blob)?;
        let next = if rng.random_bool(0.5) { (n + 1) % 1000 } else { (n + 999) % 1000 };
        Ok(next.to_string())
    }

    fn crossover(&self, a: &str, b: &str, _state: &mut VariationState, _rng: &mut dyn RngCore) -> Result<String, DomainError> {
        Ok(((TallyDomain::decode(a)? + TallyDomain::decode(b)?) / 2).to_string())
    }

    fn render(&self, blob: &str, width: u32, height: u32) -> Result<Raster, DomainError> {
        let n = TallyDomain::decode(blob)?;
        if width == 0 || height == 0 {
            return Err(DomainError::InvalidSize(width, height));
        }
        Ok(Raster::from_fn(width, height, |_, _| (n % 256) as u8))
    }
}

/// Built-in domains plus [`TallyDomain`].
pub fn registry_with_tally() -> DomainRegistry {
    let mut r = DomainRegistry::with_builtins();
    r.register(TallyDomain::descriptor(), Arc::new(TallyDomain)).expect("fresh id");
    r
}
