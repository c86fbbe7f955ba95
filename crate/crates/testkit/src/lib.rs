//! Test oracles that re-derive genome and archive properties without going
//! through the production code paths they are used to check, a toy domain
//! for exercising the plugin interface, and HTTP fixture tooling.

pub mod golden;
pub mod http;
pub mod oracle;
pub mod tally;

pub use oracle::{genome_violations, grow_genome, recursive_evaluate};
pub use tally::{registry_with_tally, TallyDomain, TALLY_ID};
