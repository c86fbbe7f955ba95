use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A published genome and its lineage. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactRecord {
    pub artifact_id: String,
    pub seq: u64,
    pub domain_id: String,
    pub parent_ids: Vec<String>,
    pub generation: u64,
    pub author: String,
    pub created_at: u64,
    pub tags: Vec<String>,
    pub genome_blob: String,
}

/// Record metadata; the genome is only carried when asked for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactSummary {
    pub artifact_id: String,
    pub seq: u64,
    pub domain_id: String,
    pub parent_ids: Vec<String>,
    pub generation: u64,
    pub author: String,
    pub created_at: u64,
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genome_blob: Option<String>,
}

impl ArtifactRecord {
    pub fn summary(&self, with_genome: bool) -> ArtifactSummary {
        ArtifactSummary {
            artifact_id: self.artifact_id.clone(),
            seq: self.seq,
            domain_id: self.domain_id.clone(),
            parent_ids: self.parent_ids.clone(),
            generation: self.generation,
            author: self.author.clone(),
            created_at: self.created_at,
            tags: self.tags.clone(),
            genome_blob: with_genome.then(|| self.genome_blob.clone()),
        }
    }

    /// Digest recomputed from the identity fields.
    pub fn expected_id(&self) -> String {
        compute_artifact_id(&self.domain_id, self.genome_blob.as_bytes(), &self.parent_ids)
    }
}

/// SHA-256 over `domain_id \n genome_blob \n parent_ids.join(",")`, as
/// lowercase hex. Callers pass `parent_ids` already sorted.
pub fn compute_artifact_id<S: AsRef<str>>(domain_id: &str, genome_blob: &[u8], parent_ids: &[S]) -> String {
    let mut h = Sha256::new();
    h.update(domain_id.as_bytes());
    h.update(b"\n");
    h.update(genome_blob);
    h.update(b"\n");
    for (i, p) in parent_ids.iter().enumerate() {
        if i > 0 {
            h.update(b",");
        }
        h.update(p.as_ref().as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn is_artifact_id(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}
