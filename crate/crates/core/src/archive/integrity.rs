use std::collections::HashMap;
use std::fmt;

use super::record::is_artifact_id;
use super::ArtifactRecord;
use crate::domains::DomainRegistry;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub seq: u64,
    pub artifact_id: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seq {} ({}): {}", self.seq, self.artifact_id, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct IntegrityReport {
    pub records: usize,
    pub violations: Vec<Violation>,
    /// Non-fatal findings, e.g. records of a domain this registry lacks.
    pub warnings: Vec<String>,
}

impl IntegrityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every archive invariant over a full log in seq order.
///
/// Genomes of domains missing from `registry` are not validated; that is
/// reported as a warning since the store may have been written by a server
/// with extra plugins.
pub fn check_records(records: &[ArtifactRecord], registry: &DomainRegistry) -> IntegrityReport {
    struct Seen<'a> {
        seq: u64,
        domain: &'a str,
        generation: u64,
    }

    let mut report = IntegrityReport { records: records.len(), ..Default::default() };
    let mut seen: HashMap<&str, Seen<'_>> = HashMap::with_capacity(records.len());
    let mut unknown_domains: HashMap<&str, usize> = HashMap::new();

    for (i, r) in records.iter().enumerate() {
        let mut fail = |message: String| {
            report.violations.push(Violation { seq: r.seq, artifact_id: r.artifact_id.clone(), message });
        };

        let expected_seq = i as u64 + 1;
        if r.seq != expected_seq {
            fail(format!("seq {} where {} was expected", r.seq, expected_seq));
        }
        if !is_artifact_id(&r.artifact_id) {
            fail("artifact_id is not 64 lowercase hex digits".into());
        }
        let recomputed = r.expected_id();
        if recomputed != r.artifact_id {
            fail(format!("artifact_id does not match content digest {recomputed}"));
        }
        if r.parent_ids.len() > 2 {
            fail(format!("{} parents, at most 2 allowed", r.parent_ids.len()));
        }
        if r.parent_ids.windows(2).any(|w| w[0] >= w[1]) {
            fail("parent_ids are not sorted and unique".into());
        }

        let mut parent_generation: Option<u64> = None;
        for p in &r.parent_ids {
            match seen.get(p.as_str()) {
                None => fail(format!("parent {p} is not an earlier record")),
                Some(parent) => {
                    if parent.seq >= r.seq {
                        fail(format!("parent {p} has seq {} >= {}", parent.seq, r.seq));
                    }
                    if parent.domain != r.domain_id {
                        fail(format!("parent {p} belongs to domain {}", parent.domain));
                    }
                    parent_generation = Some(parent_generation.map_or(parent.generation, |g| g.max(parent.generation)));
                }
            }
        }
        let expected_generation = if r.parent_ids.is_empty() {
            Some(0)
        } else {
            parent_generation.map(|g| g + 1)
        };
        if let Some(g) = expected_generation {
            if g != r.generation {
                fail(format!("generation {} where {} was expected", r.generation, g));
            }
        }

        match registry.domain(&r.domain_id) {
            Some(domain) => {
                if let Err(e) = domain.validate(&r.genome_blob) {
                    fail(e.to_string());
                }
            }
            None => *unknown_domains.entry(r.domain_id.as_str()).or_default() += 1,
        }

        if seen.contains_key(r.artifact_id.as_str()) {
            fail("duplicate artifact_id".into());
        } else {
            seen.insert(
                r.artifact_id.as_str(),
                Seen { seq: r.seq, domain: r.domain_id.as_str(), generation: r.generation },
            );
        }
    }

    let mut unknown: Vec<_> = unknown_domains.into_iter().collect();
    unknown.sort();
    for (domain, count) in unknown {
        report
            .warnings
            .push(format!("{count} records of unregistered domain {domain:?}: genomes not validated"));
    }
    report
}
