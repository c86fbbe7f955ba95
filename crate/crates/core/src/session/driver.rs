use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SelectionPolicy, Session, SessionConfig, SessionError, SessionParams};
use crate::archive::Archive;

/// Parameters of an automated run.
#[derive(Debug, Clone)]
pub struct AutoRun {
    pub domain_id: String,
    pub steps: u64,
    pub publish_every: u64,
    pub rng_seed: u64,
    pub author: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AutoRunReport {
    /// Artifact ids in publish order.
    pub published: Vec<String>,
    /// Artifact the run first branched from, if the domain had any.
    pub branched_from: Option<String>,
    /// Best candidate fitness after each step (empty for domains without one).
    pub best_fitness: Vec<f64>,
}

/// Runs `steps` generations with `policy` choosing in place of a human.
///
/// The run branches from the policy's favourite published artifact (or starts
/// fresh), publishes the policy's top candidate every `publish_every` steps
/// and then re-branches from what it just published, so the published
/// artifacts form a lineage chain. Everything random derives from `rng_seed`.
pub fn run_automated(
    archive: &Archive,
    config: &SessionConfig,
    run: &AutoRun,
    policy: &mut dyn SelectionPolicy,
) -> Result<AutoRunReport, SessionError> {
    if run.steps == 0 {
        return Err(SessionError::InvalidArgument("steps must be at least 1".into()));
    }
    if run.publish_every == 0 {
        return Err(SessionError::InvalidArgument("publish_every must be at least 1".into()));
    }
    let domain = archive
        .registry()
        .domain(&run.domain_id)
        .cloned()
        .ok_or_else(|| SessionError::UnknownDomain(run.domain_id.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.rng_seed);
    let tags = vec!["auto".to_string(), policy.name().to_string()];

    let existing = archive.domain_records(&run.domain_id);
    let branched_from = if existing.is_empty() {
        None
    } else {
        let blobs: Vec<&str> = existing.iter().map(|r| r.genome_blob.as_str()).collect();
        Some(existing[policy.best(&blobs, domain.as_ref(), &mut rng)?].artifact_id.clone())
    };

    let branch = |seed: Option<String>, rng: &mut ChaCha8Rng| {
        let params = SessionParams {
            domain_id: run.domain_id.clone(),
            seed_artifact_ids: seed.into_iter().collect(),
            pop_size: None,
            rng_seed: Some(rng.next_u64()),
            carry_seeds: true,
        };
        Session::create(archive, &params, config)
    };

    let mut report = AutoRunReport { branched_from: branched_from.clone(), ..Default::default() };
    let mut session = branch(branched_from, &mut rng)?;
    for step in 1..=run.steps {
        let selected = policy.choose(&session.blobs(), domain.as_ref(), &mut rng)?;
        session.step_select(session.op_epoch, &selected)?;
        if let Some(best) = session.blobs().iter().filter_map(|b| domain.fitness(b)).reduce(f64::max) {
            report.best_fitness.push(best);
        }
        if step % run.publish_every == 0 {
            let top = policy.best(&session.blobs(), domain.as_ref(), &mut rng)?;
            let record = session.publish_candidate(archive, top, &run.author, &tags)?.record;
            report.published.push(record.artifact_id.clone());
            if step < run.steps {
                session = branch(Some(record.artifact_id), &mut rng)?;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::Direction;
    use crate::domains::{DomainRegistry, BITSTRING_ID, PICTURE_ID};
    use crate::session::{OneMaxPolicy, RandomPolicy};
    use std::sync::Arc;

    fn archive() -> Archive {
        Archive::in_memory(Arc::new(DomainRegistry::with_builtins()))
    }

    fn run(domain: &str, steps: u64, every: u64, seed: u64) -> AutoRun {
        AutoRun { domain_id: domain.into(), steps, publish_every: every, rng_seed: seed, author: "auto".into() }
    }

    #[test]
    fn publishes_a_chain() {
        let a = archive();
        let r = run_automated(&a, &SessionConfig::default(), &run(BITSTRING_ID, 10, 5, 1), &mut OneMaxPolicy).unwrap();
        assert_eq!(r.published.len(), 2);
        let second = a.get(&r.published[1]).unwrap();
        assert_eq!(second.parent_ids, vec![r.published[0].clone()]);
        assert_eq!(a.get(&r.published[0]).unwrap().generation, 0);
    }

    #[test]
    fn onemax_trace_never_drops() {
        let a = archive();
        let r = run_automated(&a, &SessionConfig::default(), &run(BITSTRING_ID, 60, 7, 3), &mut OneMaxPolicy).unwrap();
        assert_eq!(r.best_fitness.len(), 60);
        assert!(r.best_fitness.windows(2).all(|w| w[1] >= w[0]), "{:?}", r.best_fitness);
    }

    #[test]
    fn deterministic_on_fresh_stores() {
        let go = || {
            let a = archive();
            run_automated(&a, &SessionConfig::default(), &run(PICTURE_ID, 12, 4, 42), &mut RandomPolicy).unwrap()
        };
        let (x, y) = (go(), go());
        assert_eq!(x.published, y.published);
        assert_eq!(x.published.len(), 3);
    }

    #[test]
    fn second_run_branches_from_existing_work() {
        let a = archive();
        let first = run_automated(&a, &SessionConfig::default(), &run(BITSTRING_ID, 4, 2, 1), &mut OneMaxPolicy).unwrap();
        let second = run_automated(&a, &SessionConfig::default(), &run(BITSTRING_ID, 4, 2, 2), &mut OneMaxPolicy).unwrap();
        let branched = second.branched_from.clone().unwrap();
        assert!(first.published.contains(&branched));
        let up = a.ancestry(second.published.last().unwrap(), Direction::Up, None).unwrap();
        assert!(up.contains(&branched));
    }

    #[test]
    fn argument_errors() {
        let a = archive();
        let cfg = SessionConfig::default();
        assert!(run_automated(&a, &cfg, &run(BITSTRING_ID, 0, 1, 0), &mut OneMaxPolicy).is_err());
        assert!(run_automated(&a, &cfg, &run(BITSTRING_ID, 1, 0, 0), &mut OneMaxPolicy).is_err());
        assert!(run_automated(&a, &cfg, &run("nope", 1, 1, 0), &mut OneMaxPolicy).is_err());
        assert!(run_automated(&a, &cfg, &run(PICTURE_ID, 1, 1, 0), &mut OneMaxPolicy).is_err());
    }
}
