//! Interactive evolution sessions.
//!
//! A session is a volatile workspace: it branches from zero or more published
//! artifacts (or from fresh random genomes), holds a candidate population,
//! advances one generation per human selection, and publishes chosen
//! candidates back to the archive. Publishing is the only way work outlives
//! a session.

mod driver;
mod manager;
mod policy;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use driver::{run_automated, AutoRun, AutoRunReport};
pub use manager::SessionManager;
pub use policy::{policy_by_name, OneMaxPolicy, RandomPolicy, SelectionPolicy};

use crate::archive::{Archive, ArchiveError, Published, MAX_PARENTS};
use crate::domains::{Domain, DomainError, VariationState};

pub const DEFAULT_POP_SIZE: usize = 12;
pub const MIN_POP_SIZE: usize = 2;
pub const MAX_POP_SIZE: usize = 50;
pub const MAX_SEEDS: usize = 8;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown domain {0:?}")]
    UnknownDomain(String),
    #[error("unknown seed artifact {0}")]
    UnknownParent(String),
    #[error("seed {seed} belongs to domain {seed_domain:?}, not {domain:?}")]
    CrossDomainParent { seed: String, seed_domain: String, domain: String },
    #[error("pop_size {0} outside {MIN_POP_SIZE}..={MAX_POP_SIZE}")]
    InvalidPopSize(usize),
    #[error("selection is empty")]
    EmptySelection,
    #[error("candidate index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("stale op_epoch {given}, session is at {current}")]
    StaleEpoch { given: u64, current: u64 },
    #[error("session {0} not found")]
    NotFound(String),
    #[error("session {0} expired")]
    Expired(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
}

/// Session-level knobs shared by every session of a manager.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    /// Chance that an offspring comes from crossover when two or more
    /// candidates are selected.
    pub p_crossover: f64,
    pub default_pop_size: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { p_crossover: 0.30, default_pop_size: DEFAULT_POP_SIZE }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionParams {
    pub domain_id: String,
    #[serde(default)]
    pub seed_artifact_ids: Vec<String>,
    #[serde(default)]
    pub pop_size: Option<usize>,
    #[serde(default)]
    pub rng_seed: Option<u64>,
    /// Put each seed genome, unmutated, into the first population. Used by
    /// the automated driver so re-branching never loses the best individual.
    #[serde(skip)]
    pub carry_seeds: bool,
}

impl SessionParams {
    pub fn new(domain_id: impl Into<String>) -> Self {
        SessionParams { domain_id: domain_id.into(), ..Default::default() }
    }

    pub fn seeds(mut self, seeds: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.seed_artifact_ids = seeds.into_iter().map(Into::into).collect();
        self
    }

    pub fn pop_size(mut self, n: usize) -> Self {
        self.pop_size = Some(n);
        self
    }

    pub fn rng_seed(mut self, seed: u64) -> Self {
        self.rng_seed = Some(seed);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub genome_blob: String,
    /// Session seeds this candidate descends from.
    pub lineage_roots: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub index: usize,
    pub lineage_roots: Vec<String>,
}

/// Client-facing snapshot of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub op_epoch: u64,
    pub step: u64,
    pub candidates: Vec<CandidateSummary>,
}

pub struct Session {
    pub session_id: String,
    pub domain_id: String,
    pub seed_artifact_ids: Vec<String>,
    pub candidates: Vec<Candidate>,
    pub pop_size: usize,
    pub step: u64,
    pub rng_seed: u64,
    pub last_activity: u64,
    pub op_epoch: u64,
    p_crossover: f64,
    domain: Arc<dyn Domain>,
    variation: VariationState,
    rng: ChaCha8Rng,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("session_id", &self.session_id)
            .field("domain_id", &self.domain_id)
            .field("step", &self.step)
            .field("op_epoch", &self.op_epoch)
            .finish_non_exhaustive()
    }
}

pub fn new_session_id() -> String {
    format!("{:032x}", rand::rng().random::<u128>())
}

impl Session {
    /// Branches from `params.seed_artifact_ids`, or starts from random genomes
    /// when there are none.
    pub fn create(archive: &Archive, params: &SessionParams, config: &SessionConfig) -> Result<Session, SessionError> {
        let domain = archive
            .registry()
            .domain(&params.domain_id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownDomain(params.domain_id.clone()))?;
        let pop_size = params.pop_size.unwrap_or(config.default_pop_size);
        if !(MIN_POP_SIZE..=MAX_POP_SIZE).contains(&pop_size) {
            return Err(SessionError::InvalidPopSize(pop_size));
        }
        let mut seed_ids: Vec<String> = Vec::new();
        for s in &params.seed_artifact_ids {
            if !seed_ids.contains(s) {
                seed_ids.push(s.clone());
            }
        }
        if seed_ids.len() > MAX_SEEDS {
            return Err(SessionError::InvalidArgument(format!("at most {MAX_SEEDS} seed artifacts")));
        }
        let mut seeds = Vec::with_capacity(seed_ids.len());
        for id in &seed_ids {
            let record = archive.get(id).map_err(|e| match e {
                ArchiveError::NotFound(id) => SessionError::UnknownParent(id),
                other => other.into(),
            })?;
            if record.domain_id != params.domain_id {
                return Err(SessionError::CrossDomainParent {
                    seed: id.clone(),
                    seed_domain: record.domain_id,
                    domain: params.domain_id.clone(),
                });
            }
            seeds.push(record);
        }

        let rng_seed = params.rng_seed.unwrap_or_else(|| rand::rng().random());
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let seed_blobs: Vec<&str> = seeds.iter().map(|r| r.genome_blob.as_str()).collect();
        let mut variation = domain.variation_state(&seed_blobs);

        let mut candidates = Vec::with_capacity(pop_size);
        if params.carry_seeds {
            for r in seeds.iter().take(pop_size) {
                candidates.push(Candidate {
                    genome_blob: r.genome_blob.clone(),
                    lineage_roots: [r.artifact_id.clone()].into(),
                });
            }
        }
        while candidates.len() < pop_size {
            let candidate = if seeds.is_empty() {
                Candidate { genome_blob: domain.random_seed(&mut rng), lineage_roots: BTreeSet::new() }
            } else {
                let seed = &seeds[rng.random_range(0..seeds.len())];
                Candidate {
                    genome_blob: domain.mutate(&seed.genome_blob, &mut variation, &mut rng)?,
                    lineage_roots: [seed.artifact_id.clone()].into(),
                }
            };
            candidates.push(candidate);
        }

        Ok(Session {
            session_id: new_session_id(),
            domain_id: params.domain_id.clone(),
            seed_artifact_ids: seed_ids,
            candidates,
            pop_size,
            step: 0,
            rng_seed,
            last_activity: crate::now_millis(),
            op_epoch: 0,
            p_crossover: config.p_crossover,
            domain,
            variation,
            rng,
        })
    }

    pub fn domain(&self) -> &Arc<dyn Domain> {
        &self.domain
    }

    pub fn candidate(&self, index: usize) -> Result<&Candidate, SessionError> {
        self.candidates.get(index).ok_or(SessionError::IndexOutOfRange(index))
    }

    pub fn blobs(&self) -> Vec<&str> {
        self.candidates.iter().map(|c| c.genome_blob.as_str()).collect()
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.session_id.clone(),
            op_epoch: self.op_epoch,
            step: self.step,
            candidates: self
                .candidates
                .iter()
                .enumerate()
                .map(|(index, c)| CandidateSummary { index, lineage_roots: c.lineage_roots.iter().cloned().collect() })
                .collect(),
        }
    }

    /// Advances one generation. Selected candidates survive unchanged in the
    /// first slots (ascending index order); the rest are offspring of the
    /// selection.
    pub fn step_select(&mut self, op_epoch: u64, selected: &[usize]) -> Result<(), SessionError> {
        if op_epoch != self.op_epoch {
            return Err(SessionError::StaleEpoch { given: op_epoch, current: self.op_epoch });
        }
        if selected.is_empty() {
            return Err(SessionError::EmptySelection);
        }
        let chosen: BTreeSet<usize> = selected.iter().copied().collect();
        if let Some(&bad) = chosen.iter().find(|&&i| i >= self.candidates.len()) {
            return Err(SessionError::IndexOutOfRange(bad));
        }
        let parents: Vec<Candidate> = chosen.iter().map(|&i| self.candidates[i].clone()).collect();

        let mut next = parents.clone();
        while next.len() < self.pop_size {
            let child = if parents.len() >= 2 && self.rng.random_bool(self.p_crossover) {
                let i = self.rng.random_range(0..parents.len());
                let mut j = self.rng.random_range(0..parents.len() - 1);
                if j >= i {
                    j += 1;
                }
                let (a, b) = (&parents[i], &parents[j]);
                let crossed = self.domain.crossover(&a.genome_blob, &b.genome_blob, &mut self.variation, &mut self.rng)?;
                Candidate {
                    genome_blob: self.domain.mutate(&crossed, &mut self.variation, &mut self.rng)?,
                    lineage_roots: a.lineage_roots.union(&b.lineage_roots).cloned().collect(),
                }
            } else {
                let p = &parents[self.rng.random_range(0..parents.len())];
                Candidate {
                    genome_blob: self.domain.mutate(&p.genome_blob, &mut self.variation, &mut self.rng)?,
                    lineage_roots: p.lineage_roots.clone(),
                }
            };
            next.push(child);
        }

        self.candidates = next;
        self.step += 1;
        self.op_epoch += 1;
        self.last_activity = crate::now_millis();
        Ok(())
    }

    /// Publishes candidate `index` with its lineage roots as parents. More
    /// than two roots are cut down to the two lexicographically smallest ids.
    pub fn publish_candidate(
        &mut self,
        archive: &Archive,
        index: usize,
        author: &str,
        tags: &[String],
    ) -> Result<Published, SessionError> {
        let candidate = self.candidate(index)?;
        let roots = &candidate.lineage_roots;
        if roots.len() > MAX_PARENTS {
            log::warn!(
                "session {}: candidate {index} has {} lineage roots, publishing with the {MAX_PARENTS} smallest",
                self.session_id,
                roots.len()
            );
        }
        let parents: Vec<String> = roots.iter().take(MAX_PARENTS).cloned().collect();
        let published = archive.publish(&self.domain_id, &candidate.genome_blob, &parents, author, tags)?;
        self.last_activity = crate::now_millis();
        Ok(published)
    }
}
