use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::ArtifactSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Towards ancestors.
    Up,
    /// Towards descendants.
    Down,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            other => Err(format!("direction must be up or down, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub parent: String,
    pub child: String,
}

/// A lineage subgraph: nodes in seq order, parent -> child edges, and the
/// nodes with no parent inside the graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncestryGraph {
    pub nodes: Vec<ArtifactSummary>,
    pub edges: Vec<Edge>,
    pub roots: Vec<String>,
}

impl AncestryGraph {
    /// Induced subgraph over `nodes` (already in seq order).
    pub(crate) fn induced(nodes: Vec<ArtifactSummary>) -> AncestryGraph {
        let members: BTreeSet<&str> = nodes.iter().map(|n| n.artifact_id.as_str()).collect();
        let mut edges = Vec::new();
        let mut roots = Vec::new();
        for n in &nodes {
            let mut has_parent = false;
            for p in &n.parent_ids {
                if members.contains(p.as_str()) {
                    has_parent = true;
                    edges.push(Edge { parent: p.clone(), child: n.artifact_id.clone() });
                }
            }
            if !has_parent {
                roots.push(n.artifact_id.clone());
            }
        }
        AncestryGraph { nodes, edges, roots }
    }

    pub fn contains(&self, artifact_id: &str) -> bool {
        self.nodes.iter().any(|n| n.artifact_id == artifact_id)
    }

    /// Kahn's algorithm over the edge list; `None` if the graph has a cycle or
    /// an edge endpoint outside `nodes`.
    pub fn topological_order(&self) -> Option<Vec<String>> {
        let mut indegree: HashMap<&str, usize> = self.nodes.iter().map(|n| (n.artifact_id.as_str(), 0)).collect();
        let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
        for e in &self.edges {
            if !indegree.contains_key(e.parent.as_str()) {
                return None;
            }
            *indegree.get_mut(e.child.as_str())? += 1;
            children.entry(e.parent.as_str()).or_default().push(e.child.as_str());
        }
        let mut ready: Vec<&str> = self
            .nodes
            .iter()
            .map(|n| n.artifact_id.as_str())
            .filter(|id| indegree[id] == 0)
            .collect();
        ready.reverse();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(id) = ready.pop() {
            order.push(id.to_string());
            for c in children.get(id).into_iter().flatten() {
                let d = indegree.get_mut(c).expect("member");
                *d -= 1;
                if *d == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Graphviz rendering: one node statement per artifact labelled with its
    /// seq, one edge statement per parent link.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph phylogeny {\n");
        for n in &self.nodes {
            out.push_str(&format!("  \"{}\" [label=\"{}\"];\n", n.artifact_id, n.seq));
        }
        for e in &self.edges {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", e.parent, e.child));
        }
        out.push_str("}\n");
        out
    }
}
