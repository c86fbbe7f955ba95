//! Domain plugins.
//!
//! A domain owns a genome encoding: it validates, seeds, varies and renders
//! opaque genome blobs. The archive and sessions only ever see blobs, so any
//! evolutionary domain can be plugged in by implementing [`Domain`] and
//! registering it before the archive is opened.

mod bitstring;
mod picture;
mod raster;

use std::any::Any;
use std::collections::BTreeMap;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bitstring::{BitstringDomain, BITSTRING_LEN};
pub use picture::{render_genome, PictureDomain};
pub use raster::Raster;

pub const PICTURE_ID: &str = "cppn-picture";
pub const BITSTRING_ID: &str = "bitstring";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DomainError {
    #[error("invalid genome: {0}")]
    InvalidGenome(String),
    #[error("domain {0:?} is already registered")]
    DuplicateDomain(String),
    #[error("invalid domain id {0:?}: expected [a-z0-9-]+")]
    InvalidDomainId(String),
    #[error("invalid render size {0}x{1}")]
    InvalidSize(u32, u32),
}

/// Kind of phenotype a domain renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phenotype {
    GrayscaleRaster,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainDescriptor {
    pub domain_id: String,
    pub display_name: String,
    pub phenotype: Phenotype,
    /// `(width, height)` in pixels.
    pub default_render_size: (u32, u32),
}

/// Per-session scratch state a domain may keep between variation calls,
/// e.g. the innovation table of the picture domain.
pub type VariationState = Box<dyn Any + Send>;

/// The plugin contract. Every operation is deterministic given its blob
/// arguments, the variation state and the rng stream, and every blob a
/// domain produces passes its own `validate`.
pub trait Domain: Send + Sync {
    fn validate(&self, blob: &str) -> Result<(), DomainError>;

    fn random_seed(&self, rng: &mut dyn RngCore) -> String;

    /// Fresh variation state for a session branching from `seeds`.
    fn variation_state(&self, _seeds: &[&str]) -> VariationState {
        Box::new(())
    }

    fn mutate(&self, blob: &str, state: &mut VariationState, rng: &mut dyn RngCore) -> Result<String, DomainError>;

    fn crossover(
        &self,
        a: &str,
        b: &str,
        state: &mut VariationState,
        rng: &mut dyn RngCore,
    ) -> Result<String, DomainError>;

    fn render(&self, blob: &str, width: u32, height: u32) -> Result<Raster, DomainError>;

    /// Objective score, for domains that have one. Only automated selection
    /// policies look at it.
    fn fitness(&self, _blob: &str) -> Option<f64> {
        None
    }
}

#[derive(Clone)]
pub struct RegisteredDomain {
    pub descriptor: DomainDescriptor,
    pub domain: Arc<dyn Domain>,
}

/// Domain lookup by id. Populated at startup, read-only afterwards.
#[derive(Clone, Default)]
pub struct DomainRegistry {
    domains: BTreeMap<String, RegisteredDomain>,
}

impl std::fmt::Debug for DomainRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.domains.keys()).finish()
    }
}

fn valid_domain_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

impl DomainRegistry {
    pub fn empty() -> Self {
        DomainRegistry::default()
    }

    /// Registry holding the `cppn-picture` and `bitstring` domains.
    pub fn with_builtins() -> Self {
        let mut r = DomainRegistry::empty();
        r.register(PictureDomain::descriptor(), Arc::new(PictureDomain::default()))
            .expect("built-in ids are valid");
        r.register(BitstringDomain::descriptor(), Arc::new(BitstringDomain))
            .expect("built-in ids are valid");
        r
    }

    pub fn register(&mut self, descriptor: DomainDescriptor, domain: Arc<dyn Domain>) -> Result<(), DomainError> {
        if !valid_domain_id(&descriptor.domain_id) {
            return Err(DomainError::InvalidDomainId(descriptor.domain_id));
        }
        if self.domains.contains_key(&descriptor.domain_id) {
            return Err(DomainError::DuplicateDomain(descriptor.domain_id));
        }
        self.domains
            .insert(descriptor.domain_id.clone(), RegisteredDomain { descriptor, domain });
        Ok(())
    }

    pub fn get(&self, domain_id: &str) -> Option<&RegisteredDomain> {
        self.domains.get(domain_id)
    }

    pub fn domain(&self, domain_id: &str) -> Option<&Arc<dyn Domain>> {
        self.domains.get(domain_id).map(|r| &r.domain)
    }

    pub fn contains(&self, domain_id: &str) -> bool {
        self.domains.contains_key(domain_id)
    }

    /// Descriptors in id order.
    pub fn descriptors(&self) -> Vec<&DomainDescriptor> {
        self.domains.values().map(|r| &r.descriptor).collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.domains.keys().map(String::as_str).collect()
    }
}
