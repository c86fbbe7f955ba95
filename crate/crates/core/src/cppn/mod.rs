//! CPPN-NEAT genomes for the picture domain.
//!
//! A genome has five fixed nodes (inputs `x`, `y`, `d`, a bias and one output)
//! plus any number of hidden nodes, joined by innovation-numbered connection
//! genes. The enabled connection graph is always acyclic, so a network is
//! evaluated in one topological pass.

mod activation;
mod crossover;
pub mod genome;
mod innovation;
mod mutation;
mod network;

use thiserror::Error;

pub use activation::Activation;
pub use crossover::crossover;
pub use genome::{ConnectionGene, Genome, NodeGene, NodeKind};
pub use innovation::InnovationTable;
pub use mutation::{mutate, MutationConfig};
pub use network::{compile, CompiledNetwork};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GenomeError {
    #[error("{0}")]
    Invalid(String),
    #[error("enabled connections form a cycle")]
    CycleDetected,
    #[error("connection {0} references a missing node")]
    DanglingNode(u32),
    #[error("incompatible genomes: {0}")]
    Incompatible(String),
}
