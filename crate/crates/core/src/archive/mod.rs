//! Persistent archive of published artifacts.
//!
//! Records are appended to a [`StorageBackend`] (by default a JSON-Lines file)
//! and indexed in memory. An artifact's id is the SHA-256 of its domain,
//! genome and sorted parent ids, so republishing the same discovery returns
//! the existing record instead of creating a new one. Parents must already be
//! in the archive, which makes the lineage a DAG by construction.

mod graph;
mod integrity;
mod record;
mod storage;

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use thiserror::Error;

pub use graph::{AncestryGraph, Direction, Edge};
pub use integrity::{check_records, IntegrityReport, Violation};
pub use record::{compute_artifact_id, is_artifact_id, ArtifactRecord, ArtifactSummary};
pub use storage::{parse_log, JsonlBackend, LogContents, MemoryBackend, StorageBackend, LOG_FILE};

use crate::domains::{DomainError, DomainRegistry};

pub const MAX_PARENTS: usize = 2;
pub const MAX_PAGE: usize = 500;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("unknown domain {0:?}")]
    UnknownDomain(String),
    #[error("unknown parent artifact {0}")]
    UnknownParent(String),
    #[error("invalid genome: {0}")]
    InvalidGenome(String),
    #[error("parent {parent} belongs to domain {parent_domain:?}, not {domain:?}")]
    CrossDomainParent { parent: String, parent_domain: String, domain: String },
    #[error("artifact {0} not found")]
    NotFound(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("corrupt store at line {line}: {reason}")]
    CorruptStore { line: usize, reason: String },
    #[error("storage i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of [`Archive::publish`].
#[derive(Debug, Clone)]
pub struct Published {
    pub record: ArtifactRecord,
    /// False when an identical artifact was already present.
    pub created: bool,
}

#[derive(Debug, Clone)]
pub struct Page {
    pub total: usize,
    pub items: Vec<ArtifactSummary>,
}

#[derive(Default)]
struct Index {
    records: Vec<Arc<ArtifactRecord>>,
    by_id: HashMap<String, usize>,
    by_domain: HashMap<String, Vec<usize>>,
    children: HashMap<String, Vec<usize>>,
}

impl Index {
    fn insert(&mut self, record: ArtifactRecord) {
        let pos = self.records.len();
        self.by_id.insert(record.artifact_id.clone(), pos);
        self.by_domain.entry(record.domain_id.clone()).or_default().push(pos);
        for p in &record.parent_ids {
            self.children.entry(p.clone()).or_default().push(pos);
        }
        self.records.push(Arc::new(record));
    }

    fn get(&self, id: &str) -> Option<&Arc<ArtifactRecord>> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }
}

/// Shared handle to the artifact store. Reads run concurrently; publishes are
/// serialized through a single committer.
pub struct Archive {
    registry: Arc<DomainRegistry>,
    index: RwLock<Index>,
    committer: Mutex<Box<dyn StorageBackend>>,
    sync_on_commit: AtomicBool,
}

impl std::fmt::Debug for Archive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Archive").field("records", &self.len()).finish()
    }
}

impl Archive {
    /// Opens the JSON-Lines store in `dir`, creating it if absent, and
    /// replays the log.
    pub fn open(dir: impl AsRef<Path>, registry: Arc<DomainRegistry>) -> Result<Archive, ArchiveError> {
        Archive::with_backend(Box::new(JsonlBackend::open(dir)?), registry)
    }

    pub fn in_memory(registry: Arc<DomainRegistry>) -> Archive {
        Archive::with_backend(Box::new(MemoryBackend::new()), registry).expect("empty backend replays")
    }

    /// Rebuilds the indexes from `backend.scan()`.
    pub fn with_backend(backend: Box<dyn StorageBackend>, registry: Arc<DomainRegistry>) -> Result<Archive, ArchiveError> {
        let mut index = Index::default();
        for (i, record) in backend.scan()?.into_iter().enumerate() {
            let corrupt = |reason: String| ArchiveError::CorruptStore { line: i + 1, reason };
            if record.seq != i as u64 + 1 {
                return Err(corrupt(format!("seq {} out of order", record.seq)));
            }
            if index.by_id.contains_key(&record.artifact_id) {
                return Err(corrupt(format!("duplicate artifact_id {}", record.artifact_id)));
            }
            index.insert(record);
        }
        Ok(Archive {
            registry,
            index: RwLock::new(index),
            committer: Mutex::new(backend),
            sync_on_commit: AtomicBool::new(false),
        })
    }

    /// When set, every publish waits for the backend's durability barrier.
    /// Otherwise each record is handed to the OS in a single write, which
    /// survives a process crash but not a power loss.
    pub fn set_sync_on_commit(&self, on: bool) {
        self.sync_on_commit.store(on, Ordering::Relaxed);
    }

    pub fn registry(&self) -> &Arc<DomainRegistry> {
        &self.registry
    }

    pub fn len(&self) -> usize {
        self.index.read().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sync(&self) -> Result<(), ArchiveError> {
        self.committer.lock().sync()
    }

    /// Publishes a genome. `parent_ids` may be given in any order; they are
    /// sorted (and deduplicated) before hashing. Publishing an existing
    /// `(domain, genome, parents)` triple returns the stored record.
    pub fn publish(
        &self,
        domain_id: &str,
        genome_blob: &str,
        parent_ids: &[String],
        author: &str,
        tags: &[String],
    ) -> Result<Published, ArchiveError> {
        let domain = self
            .registry
            .domain(domain_id)
            .ok_or_else(|| ArchiveError::UnknownDomain(domain_id.to_string()))?;
        let mut parents = parent_ids.to_vec();
        parents.sort();
        parents.dedup();
        if parents.len() > MAX_PARENTS {
            return Err(ArchiveError::InvalidArgument(format!(
                "{} parents given, at most {MAX_PARENTS} allowed",
                parents.len()
            )));
        }
        let artifact_id = compute_artifact_id(domain_id, genome_blob.as_bytes(), &parents);

        if let Some(existing) = self.index.read().get(&artifact_id) {
            return Ok(Published { record: (**existing).clone(), created: false });
        }
        domain
            .validate(genome_blob)
            .map_err(|e| match e {
                DomainError::InvalidGenome(m) => ArchiveError::InvalidGenome(m),
                other => ArchiveError::InvalidGenome(other.to_string()),
            })?;

        let mut backend = self.committer.lock();
        // re-check under the committer: another publisher may have won
        let (seq, generation) = {
            let index = self.index.read();
            if let Some(existing) = index.get(&artifact_id) {
                return Ok(Published { record: (**existing).clone(), created: false });
            }
            let mut generation = 0;
            for p in &parents {
                let parent = index.get(p).ok_or_else(|| ArchiveError::UnknownParent(p.clone()))?;
                if parent.domain_id != domain_id {
                    return Err(ArchiveError::CrossDomainParent {
                        parent: p.clone(),
                        parent_domain: parent.domain_id.clone(),
                        domain: domain_id.to_string(),
                    });
                }
                generation = generation.max(parent.generation + 1);
            }
            (index.records.len() as u64 + 1, generation)
        };

        let record = ArtifactRecord {
            artifact_id,
            seq,
            domain_id: domain_id.to_string(),
            parent_ids: parents,
            generation,
            author: author.to_string(),
            created_at: crate::now_millis(),
            tags: tags.to_vec(),
            genome_blob: genome_blob.to_string(),
        };
        backend.append(&record)?;
        if self.sync_on_commit.load(Ordering::Relaxed) {
            backend.sync()?;
        }
        self.index.write().insert(record.clone());
        Ok(Published { record, created: true })
    }

    pub fn get(&self, artifact_id: &str) -> Result<ArtifactRecord, ArchiveError> {
        self.index
            .read()
            .get(artifact_id)
            .map(|r| (**r).clone())
            .ok_or_else(|| ArchiveError::NotFound(artifact_id.to_string()))
    }

    /// A page of one domain's records in seq order.
    pub fn list(&self, domain_id: &str, offset: usize, limit: usize) -> Result<Page, ArchiveError> {
        self.require_domain(domain_id)?;
        if !(1..=MAX_PAGE).contains(&limit) {
            return Err(ArchiveError::InvalidArgument(format!("limit must be in 1..={MAX_PAGE}")));
        }
        let index = self.index.read();
        let positions = index.by_domain.get(domain_id).map(Vec::as_slice).unwrap_or(&[]);
        let items = positions
            .iter()
            .skip(offset)
            .take(limit)
            .map(|&i| index.records[i].summary(false))
            .collect();
        Ok(Page { total: positions.len(), items })
    }

    /// Full records of one domain in seq order.
    pub fn domain_records(&self, domain_id: &str) -> Vec<ArtifactRecord> {
        let index = self.index.read();
        index
            .by_domain
            .get(domain_id)
            .into_iter()
            .flatten()
            .map(|&i| (*index.records[i]).clone())
            .collect()
    }

    /// Every record in seq order.
    pub fn records(&self) -> Vec<ArtifactRecord> {
        self.index.read().records.iter().map(|r| (**r).clone()).collect()
    }

    /// Transitive parents (`Up`) or children (`Down`) of an artifact, up to
    /// `depth` hops (`None` = unlimited). The queried node is always included.
    pub fn ancestry(&self, artifact_id: &str, direction: Direction, depth: Option<usize>) -> Result<AncestryGraph, ArchiveError> {
        let index = self.index.read();
        let start = *index
            .by_id
            .get(artifact_id)
            .ok_or_else(|| ArchiveError::NotFound(artifact_id.to_string()))?;

        let mut visited = vec![start];
        let mut seen: std::collections::HashSet<usize> = [start].into_iter().collect();
        let mut queue = VecDeque::from([(start, 0usize)]);
        while let Some((pos, d)) = queue.pop_front() {
            if depth.is_some_and(|max| d >= max) {
                continue;
            }
            let next: Vec<usize> = match direction {
                Direction::Up => index.records[pos]
                    .parent_ids
                    .iter()
                    .filter_map(|p| index.by_id.get(p).copied())
                    .collect(),
                Direction::Down => index
                    .children
                    .get(&index.records[pos].artifact_id)
                    .cloned()
                    .unwrap_or_default(),
            };
            for n in next {
                if seen.insert(n) {
                    visited.push(n);
                    queue.push_back((n, d + 1));
                }
            }
        }
        visited.sort_unstable();
        let nodes = visited.into_iter().map(|i| index.records[i].summary(false)).collect();
        Ok(AncestryGraph::induced(nodes))
    }

    /// The whole lineage DAG of one domain.
    pub fn phylogeny(&self, domain_id: &str) -> Result<AncestryGraph, ArchiveError> {
        self.require_domain(domain_id)?;
        let index = self.index.read();
        let nodes = index
            .by_domain
            .get(domain_id)
            .into_iter()
            .flatten()
            .map(|&i| index.records[i].summary(false))
            .collect();
        Ok(AncestryGraph::induced(nodes))
    }

    /// Runs the full integrity check over the indexed records.
    pub fn check(&self) -> IntegrityReport {
        check_records(&self.records(), &self.registry)
    }

    fn require_domain(&self, domain_id: &str) -> Result<(), ArchiveError> {
        if self.registry.contains(domain_id) {
            Ok(())
        } else {
            Err(ArchiveError::UnknownDomain(domain_id.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{BitstringDomain, Domain, BITSTRING_ID, PICTURE_ID};
    use rand::SeedableRng;

    fn archive() -> Archive {
        Archive::in_memory(Arc::new(DomainRegistry::with_builtins()))
    }

    fn bits(n: u64) -> String {
        BitstringDomain.random_seed(&mut rand_chacha::ChaCha8Rng::seed_from_u64(n))
    }

    fn publish(a: &Archive, blob: &str, parents: &[&str]) -> ArtifactRecord {
        let parents: Vec<String> = parents.iter().map(|s| s.to_string()).collect();
        a.publish(BITSTRING_ID, blob, &parents, "tester", &[]).unwrap().record
    }

    #[test]
    fn generation_rule() {
        let a = archive();
        let g0 = publish(&a, &bits(1), &[]);
        assert_eq!((g0.generation, g0.seq), (0, 1));
        let g1 = publish(&a, &bits(2), &[&g0.artifact_id]);
        let g2 = publish(&a, &bits(3), &[&g1.artifact_id]);
        let other = publish(&a, &bits(4), &[]);
        let child = publish(&a, &bits(5), &[&other.artifact_id, &g2.artifact_id]);
        assert_eq!(g2.generation, 2);
        assert_eq!(child.generation, 3);
        let mut sorted = vec![other.artifact_id.clone(), g2.artifact_id.clone()];
        sorted.sort();
        assert_eq!(child.parent_ids, sorted);
    }

    #[test]
    fn idempotent_publish() {
        let a = archive();
        let first = a.publish(BITSTRING_ID, &bits(1), &[], "x", &[]).unwrap();
        let again = a.publish(BITSTRING_ID, &bits(1), &[], "someone else", &["t".into()]).unwrap();
        assert!(first.created && !again.created);
        assert_eq!(first.record, again.record);
        assert_eq!(a.len(), 1);
        let next = publish(&a, &bits(2), &[]);
        assert_eq!(next.seq, 2);
    }

    #[test]
    fn parent_order_does_not_change_identity() {
        let a = archive();
        let p = publish(&a, &bits(1), &[]);
        let q = publish(&a, &bits(2), &[]);
        let x = publish(&a, &bits(3), &[&p.artifact_id, &q.artifact_id]);
        let y = publish(&a, &bits(3), &[&q.artifact_id, &p.artifact_id]);
        assert_eq!(x, y);
    }

    #[test]
    fn publish_errors() {
        let a = archive();
        let unknown = a.publish("nope", "x", &[], "", &[]).unwrap_err();
        assert!(matches!(unknown, ArchiveError::UnknownDomain(_)));

        let bad = a.publish(BITSTRING_ID, "{\"bits\":\"01\"}", &[], "", &[]).unwrap_err();
        assert!(matches!(bad, ArchiveError::InvalidGenome(_)));

        let missing = a.publish(BITSTRING_ID, &bits(1), &["f".repeat(64)], "", &[]).unwrap_err();
        assert!(matches!(missing, ArchiveError::UnknownParent(_)));

        let picture = crate::domains::PictureDomain::default()
            .random_seed(&mut rand_chacha::ChaCha8Rng::seed_from_u64(0));
        let pic = a.publish(PICTURE_ID, &picture, &[], "", &[]).unwrap().record;
        let cross = a.publish(BITSTRING_ID, &bits(1), &[pic.artifact_id], "", &[]).unwrap_err();
        assert!(matches!(cross, ArchiveError::CrossDomainParent { .. }));

        let three: Vec<String> = (1..=3).map(|i| publish(&a, &bits(i), &[]).artifact_id).collect();
        let too_many = a.publish(BITSTRING_ID, &bits(9), &three, "", &[]).unwrap_err();
        assert!(matches!(too_many, ArchiveError::InvalidArgument(_)));
        // failed publishes consume no seq
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn get_and_not_found() {
        let a = archive();
        let r = publish(&a, &bits(1), &[]);
        assert_eq!(a.get(&r.artifact_id).unwrap(), r);
        assert!(matches!(a.get(&"0".repeat(64)), Err(ArchiveError::NotFound(_))));
    }

    #[test]
    fn list_pagination() {
        let a = archive();
        let empty = a.list(BITSTRING_ID, 0, 10).unwrap();
        assert_eq!((empty.total, empty.items.len()), (0, 0));
        let recs: Vec<_> = (1..=3).map(|i| publish(&a, &bits(i), &[])).collect();
        let page = a.list(BITSTRING_ID, 1, 1).unwrap();
        assert_eq!(page.total, 3);
        assert_eq!(page.items.len(), 1);
        assert_eq!(page.items[0].artifact_id, recs[1].artifact_id);
        assert!(page.items[0].genome_blob.is_none());
        assert!(matches!(a.list(BITSTRING_ID, 0, 0), Err(ArchiveError::InvalidArgument(_))));
        assert!(matches!(a.list(BITSTRING_ID, 0, 501), Err(ArchiveError::InvalidArgument(_))));
        assert!(matches!(a.list("nope", 0, 1), Err(ArchiveError::UnknownDomain(_))));
        assert_eq!(a.list(PICTURE_ID, 0, 5).unwrap().total, 0);
        assert_eq!(a.list(BITSTRING_ID, 7, 5).unwrap().items.len(), 0);
    }

    #[test]
    fn ancestry_queries() {
        let a = archive();
        let ra = publish(&a, &bits(1), &[]);
        let rb = publish(&a, &bits(2), &[&ra.artifact_id]);
        let rc = publish(&a, &bits(3), &[&rb.artifact_id]);

        let seed_up = a.ancestry(&ra.artifact_id, Direction::Up, None).unwrap();
        assert_eq!(seed_up.nodes.len(), 1);
        assert!(seed_up.edges.is_empty());

        let up = a.ancestry(&rc.artifact_id, Direction::Up, None).unwrap();
        assert_eq!(up.nodes.len(), 3);
        assert_eq!(up.edges.len(), 2);
        assert_eq!(up.roots, vec![ra.artifact_id.clone()]);

        let down = a.ancestry(&ra.artifact_id, Direction::Down, Some(1)).unwrap();
        let ids: Vec<_> = down.nodes.iter().map(|n| n.artifact_id.clone()).collect();
        assert_eq!(ids, vec![ra.artifact_id.clone(), rb.artifact_id.clone()]);
        assert_eq!(down.edges, vec![Edge { parent: ra.artifact_id.clone(), child: rb.artifact_id.clone() }]);

        let zero = a.ancestry(&rc.artifact_id, Direction::Up, Some(0)).unwrap();
        assert_eq!(zero.nodes.len(), 1);
        assert_eq!(zero.roots, vec![rc.artifact_id.clone()]);

        assert!(matches!(a.ancestry(&"a".repeat(64), Direction::Up, None), Err(ArchiveError::NotFound(_))));
    }

    #[test]
    fn phylogeny_snapshot() {
        let a = archive();
        assert_eq!(a.phylogeny(PICTURE_ID).unwrap(), AncestryGraph::default());
        let r1 = publish(&a, &bits(1), &[]);
        let r2 = publish(&a, &bits(2), &[&r1.artifact_id]);
        publish(&a, &bits(3), &[&r1.artifact_id, &r2.artifact_id]);
        let g = a.phylogeny(BITSTRING_ID).unwrap();
        assert_eq!(g.nodes.len(), a.list(BITSTRING_ID, 0, 10).unwrap().total);
        assert_eq!(g.edges.len(), 3);
        assert_eq!(g.topological_order().unwrap().len(), 3);
        assert!(a.phylogeny("nope").is_err());
        let dot = g.to_dot();
        assert_eq!(dot.matches("[label=").count(), 3);
        assert_eq!(dot.matches(" -> ").count(), 3);
    }

    #[test]
    fn reopen_preserves_records() {
        let dir = tempfile::tempdir().unwrap();
        let registry = Arc::new(DomainRegistry::with_builtins());
        let before = {
            let a = Archive::open(dir.path(), registry.clone()).unwrap();
            let mut last: Option<String> = None;
            for i in 0..10 {
                let parents: Vec<String> = last.iter().cloned().collect();
                last = Some(a.publish(BITSTRING_ID, &bits(i), &parents, "me", &[]).unwrap().record.artifact_id);
            }
            a.sync().unwrap();
            a.records()
        };
        let a = Archive::open(dir.path(), registry).unwrap();
        assert_eq!(a.records(), before);
        assert!(a.check().is_ok());
        let r = &before[4];
        assert_eq!(a.get(&r.artifact_id).unwrap(), *r);
    }

    #[test]
    fn corrupt_middle_line_refuses_to_open() {
        let dir = tempfile::tempdir().unwrap();
        let registry = Arc::new(DomainRegistry::with_builtins());
        {
            let a = Archive::open(dir.path(), registry.clone()).unwrap();
            for i in 0..3 {
                publish(&a, &bits(i), &[]);
            }
        }
        let path = dir.path().join(LOG_FILE);
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1] = "{not json";
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        match Archive::open(dir.path(), registry) {
            Err(ArchiveError::CorruptStore { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected CorruptStore, got {other:?}"),
        }
    }

    #[test]
    fn integrity_check_flags_tampering() {
        let a = archive();
        let r1 = publish(&a, &bits(1), &[]);
        publish(&a, &bits(2), &[&r1.artifact_id]);
        let mut records = a.records();
        assert!(check_records(&records, a.registry()).is_ok());

        records[1].generation = 5;
        let report = check_records(&records, a.registry());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].seq, 2);
        assert!(report.violations[0].message.contains("generation"));

        let mut records = a.records();
        records[0].genome_blob = bits(7);
        let report = check_records(&records, a.registry());
        assert!(report.violations.iter().any(|v| v.message.contains("digest")));
    }
}
