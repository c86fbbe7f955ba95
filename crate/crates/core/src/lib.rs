//! Core of the WIN collaborative interactive-evolution platform.
//!
//! * [`archive`]: append-only, content-addressed store of published artifacts
//!   and their lineage DAG.
//! * [`cppn`]: CPPN-NEAT genomes, variation operators and network evaluation.
//! * [`domains`]: the domain-plugin contract and the built-in `cppn-picture`
//!   and `bitstring` domains.
//! * [`session`]: interactive sessions, selection policies and the automated
//!   driver.

pub mod archive;
pub mod cppn;
pub mod domains;
pub mod session;

pub use archive::{Archive, ArchiveError, ArtifactRecord};
pub use domains::{Domain, DomainDescriptor, DomainRegistry, Raster};

/// Milliseconds since the unix epoch.
pub fn now_millis() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
