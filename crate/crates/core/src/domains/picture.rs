use rand::RngCore;

use super::{Domain, DomainDescriptor, DomainError, Phenotype, Raster, VariationState, PICTURE_ID};
use crate::cppn::{compile, crossover, mutate, Genome, GenomeError, InnovationTable, MutationConfig};

/// Grayscale pictures drawn by CPPN-NEAT genomes.
#[derive(Debug, Clone, Default)]
pub struct PictureDomain {
    pub mutation: MutationConfig,
}

impl PictureDomain {
    pub fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            domain_id: PICTURE_ID.into(),
            display_name: "CPPN Picture".into(),
            phenotype: Phenotype::GrayscaleRaster,
            default_render_size: (128, 128),
        }
    }

    fn parse(blob: &str) -> Result<Genome, DomainError> {
        Genome::parse_canonical(blob.as_bytes()).map_err(invalid)
    }

    fn table<'a>(state: &'a mut VariationState, fallback: &[&Genome]) -> &'a mut InnovationTable {
        if !state.is::<InnovationTable>() {
            let mut table = InnovationTable::with_seed_connections();
            for g in fallback {
                table.absorb(g);
            }
            *state = Box::new(table);
        }
        state.downcast_mut::<InnovationTable>().expect("just installed")
    }
}

fn invalid(e: GenomeError) -> DomainError {
    DomainError::InvalidGenome(e.to_string())
}

fn canonical(g: &Genome) -> String {
    g.canonical_string().expect("variation operators preserve genome invariants")
}

/// Samples the CPPN at every pixel centre and maps `[-1, 1]` onto `0..=255`.
pub fn render_genome(genome: &Genome, width: u32, height: u32) -> Result<Raster, DomainError> {
    if width == 0 || height == 0 {
        return Err(DomainError::InvalidSize(width, height));
    }
    let net = compile(genome).map_err(invalid)?;
    let mut scratch = Vec::new();
    let (w, h) = (f64::from(width), f64::from(height));
    Ok(Raster::from_fn(width, height, |i, j| {
        let x = -1.0 + 2.0 * (f64::from(i) + 0.5) / w;
        let y = -1.0 + 2.0 * (f64::from(j) + 0.5) / h;
        let o = net.evaluate_into(x, y, &mut scratch).clamp(-1.0, 1.0);
        (255.0 * (o + 1.0) / 2.0 + 0.5).floor() as u8
    }))
}

impl Domain for PictureDomain {
    fn validate(&self, blob: &str) -> Result<(), DomainError> {
        PictureDomain::parse(blob).map(|_| ())
    }

    fn random_seed(&self, rng: &mut dyn RngCore) -> String {
        canonical(&Genome::random_seed(rng))
    }

    fn variation_state(&self, seeds: &[&str]) -> VariationState {
        let mut table = InnovationTable::with_seed_connections();
        for g in seeds.iter().filter_map(|s| PictureDomain::parse(s).ok()) {
            table.absorb(&g);
        }
        Box::new(table)
    }

    fn mutate(&self, blob: &str, state: &mut VariationState, rng: &mut dyn RngCore) -> Result<String, DomainError> {
        let g = PictureDomain::parse(blob)?;
        let table = PictureDomain::table(state, &[&g]);
        Ok(canonical(&mutate(&g, &self.mutation, table, rng)))
    }

    fn crossover(
        &self,
        a: &str,
        b: &str,
        _state: &mut VariationState,
        rng: &mut dyn RngCore,
    ) -> Result<String, DomainError> {
        let (a, b) = (PictureDomain::parse(a)?, PictureDomain::parse(b)?);
        crossover(&a, &b, rng).map(|g| canonical(&g)).map_err(invalid)
    }

    fn render(&self, blob: &str, width: u32, height: u32) -> Result<Raster, DomainError> {
        render_genome(&PictureDomain::parse(blob)?, width, height)
    }
}
