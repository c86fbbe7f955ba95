use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, GenomeError};

pub const INPUT_X: u32 = 0;
pub const INPUT_Y: u32 = 1;
pub const INPUT_D: u32 = 2;
pub const BIAS: u32 = 3;
pub const OUTPUT: u32 = 4;
/// First id available for hidden nodes.
pub const FIRST_HIDDEN: u32 = 5;
/// Innovations 1..=4 belong to the seed connections x, y, d, bias -> output.
pub const SEED_INNOVATIONS: u32 = 4;
pub const WEIGHT_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Input,
    Bias,
    Hidden,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeGene {
    pub node_id: u32,
    pub kind: NodeKind,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionGene {
    pub innovation: u32,
    pub from: u32,
    pub to: u32,
    pub weight: f64,
    pub enabled: bool,
}

/// A CPPN-NEAT genome. Field order is the canonical serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genome {
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
}

fn fixed_kind(id: u32) -> Option<NodeKind> {
    match id {
        INPUT_X | INPUT_Y | INPUT_D => Some(NodeKind::Input),
        BIAS => Some(NodeKind::Bias),
        OUTPUT => Some(NodeKind::Output),
        _ => None,
    }
}

impl Genome {
    /// The five fixed nodes with no connections; output activation `output`.
    pub fn fixed_nodes(output: Activation) -> Vec<NodeGene> {
        (INPUT_X..=OUTPUT)
            .map(|id| NodeGene {
                node_id: id,
                kind: fixed_kind(id).expect("fixed id"),
                activation: if id == OUTPUT { output } else { Activation::Linear },
            })
            .collect()
    }

    /// Builds a genome from parts and puts it in canonical order.
    pub fn new(nodes: Vec<NodeGene>, connections: Vec<ConnectionGene>) -> Genome {
        let mut g = Genome { nodes, connections };
        g.sort();
        g
    }

    /// Five fixed nodes and the four seed connections with weights uniform in [-1, 1].
    pub fn random_seed<R: Rng + ?Sized>(rng: &mut R) -> Genome {
        let connections = (0..SEED_INNOVATIONS)
            .map(|i| ConnectionGene {
                innovation: i + 1,
                from: i,
                to: OUTPUT,
                weight: rng.random_range(-1.0..=1.0),
                enabled: true,
            })
            .collect();
        Genome {
            nodes: Genome::fixed_nodes(Activation::Sigmoid),
            connections,
        }
    }

    pub fn sort(&mut self) {
        self.nodes.sort_by_key(|n| n.node_id);
        self.connections.sort_by_key(|c| c.innovation);
    }

    pub fn node(&self, id: u32) -> Option<&NodeGene> {
        self.nodes.iter().find(|n| n.node_id == id)
    }

    pub fn max_node_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.node_id).max().unwrap_or(OUTPUT)
    }

    pub fn max_innovation(&self) -> u32 {
        self.connections.iter().map(|c| c.innovation).max().unwrap_or(0)
    }

    pub fn has_pair(&self, from: u32, to: u32) -> bool {
        self.connections.iter().any(|c| c.from == from && c.to == to)
    }

    pub fn has_innovation(&self, innovation: u32) -> bool {
        self.connections.iter().any(|c| c.innovation == innovation)
    }

    /// Checks every structural invariant of a genome.
    pub fn validate(&self) -> Result<(), GenomeError> {
        let invalid = |msg: String| Err(GenomeError::Invalid(msg));

        let mut kinds = BTreeMap::new();
        for n in &self.nodes {
            if kinds.insert(n.node_id, n.kind).is_some() {
                return invalid(format!("duplicate node_id {}", n.node_id));
            }
            match fixed_kind(n.node_id) {
                Some(k) if k != n.kind => {
                    return invalid(format!("node {} must be {:?}", n.node_id, k));
                }
                None if n.kind != NodeKind::Hidden => {
                    return invalid(format!("node {} must be hidden", n.node_id));
                }
                _ => {}
            }
        }
        for id in INPUT_X..=OUTPUT {
            if !kinds.contains_key(&id) {
                return invalid(format!("missing fixed node {id}"));
            }
        }

        let mut innovations = HashSet::new();
        let mut pairs = HashSet::new();
        for c in &self.connections {
            if c.innovation == 0 {
                return invalid("innovation numbers start at 1".into());
            }
            if !innovations.insert(c.innovation) {
                return invalid(format!("duplicate innovation {}", c.innovation));
            }
            if !pairs.insert((c.from, c.to)) {
                return invalid(format!("duplicate connection {}->{}", c.from, c.to));
            }
            let (Some(from), Some(to)) = (kinds.get(&c.from), kinds.get(&c.to)) else {
                return Err(GenomeError::DanglingNode(c.innovation));
            };
            if matches!(to, NodeKind::Input | NodeKind::Bias) {
                return invalid(format!("connection {} targets an input", c.innovation));
            }
            if *from == NodeKind::Output {
                return invalid(format!("connection {} leaves the output", c.innovation));
            }
            if !c.weight.is_finite() || c.weight.abs() > WEIGHT_LIMIT {
                return invalid(format!("connection {} weight out of range", c.innovation));
            }
        }

        if !enabled_graph_is_acyclic(self) {
            return Err(GenomeError::CycleDetected);
        }
        Ok(())
    }

    /// Canonical UTF-8 JSON: nodes by id, connections by innovation, fixed key order.
    pub fn canonicalize(&self) -> Result<Vec<u8>, GenomeError> {
        let mut g = self.clone();
        g.sort();
        g.validate()?;
        Ok(serde_json::to_vec(&g).expect("genome serializes"))
    }

    pub fn canonical_string(&self) -> Result<String, GenomeError> {
        self.canonicalize()
            .map(|b| String::from_utf8(b).expect("serde_json emits UTF-8"))
    }

    /// Parses and validates a genome from its JSON form (not necessarily canonical).
    pub fn parse(bytes: &[u8]) -> Result<Genome, GenomeError> {
        let mut g: Genome =
            serde_json::from_slice(bytes).map_err(|e| GenomeError::Invalid(e.to_string()))?;
        g.sort();
        g.validate()?;
        Ok(g)
    }

    /// Parses a blob and insists it is byte-identical to its canonical form.
    pub fn parse_canonical(bytes: &[u8]) -> Result<Genome, GenomeError> {
        let g = Genome::parse(bytes)?;
        if g.canonicalize()? != bytes {
            return Err(GenomeError::Invalid("genome is not in canonical form".into()));
        }
        Ok(g)
    }
}

/// Kahn's algorithm over enabled connections.
fn enabled_graph_is_acyclic(g: &Genome) -> bool {
    let mut indegree: BTreeMap<u32, usize> = g.nodes.iter().map(|n| (n.node_id, 0)).collect();
    let mut out: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for c in g.connections.iter().filter(|c| c.enabled) {
        *indegree.entry(c.to).or_default() += 1;
        out.entry(c.from).or_default().push(c.to);
    }
    let mut ready: BTreeSet<u32> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| *id)
        .collect();
    let mut seen = 0;
    while let Some(id) = ready.pop_first() {
        seen += 1;
        for to in out.get(&id).into_iter().flatten() {
            let d = indegree.get_mut(to).expect("target indexed");
            *d -= 1;
            if *d == 0 {
                ready.insert(*to);
            }
        }
    }
    seen == indegree.len()
}

/// True if `target` is reachable from `start` following any connection,
/// enabled or not.
pub(crate) fn reachable(g: &Genome, start: u32, target: u32) -> bool {
    let mut stack = vec![start];
    let mut visited = HashSet::new();
    while let Some(n) = stack.pop() {
        if n == target {
            return true;
        }
        if !visited.insert(n) {
            continue;
        }
        stack.extend(g.connections.iter().filter(|c| c.from == n).map(|c| c.to));
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seed(n: u64) -> Genome {
        Genome::random_seed(&mut ChaCha8Rng::seed_from_u64(n))
    }

    #[test]
    fn seed_shape() {
        let g = seed(1);
        assert_eq!(g.nodes.len(), 5);
        assert_eq!(g.connections.len(), 4);
        assert!(g.validate().is_ok());
        assert_eq!(g.node(OUTPUT).unwrap().activation, Activation::Sigmoid);
        for (i, c) in g.connections.iter().enumerate() {
            assert_eq!(c.innovation, i as u32 + 1);
            assert_eq!(c.from, i as u32);
            assert_eq!(c.to, OUTPUT);
            assert!(c.enabled);
            assert!((-1.0..=1.0).contains(&c.weight));
        }
    }

    #[test]
    fn seed_is_deterministic() {
        assert_eq!(seed(9).canonicalize().unwrap(), seed(9).canonicalize().unwrap());
        assert_ne!(seed(9).canonicalize().unwrap(), seed(10).canonicalize().unwrap());
    }

    #[test]
    fn canonical_bytes_for_fixed_genome() {
        let g = Genome::new(
            Genome::fixed_nodes(Activation::Sigmoid),
            vec![ConnectionGene { innovation: 4, from: 3, to: 4, weight: 0.5, enabled: true }],
        );
        let expected = concat!(
            r#"{"nodes":["#,
            r#"{"node_id":0,"kind":"input","activation":"linear"},"#,
            r#"{"node_id":1,"kind":"input","activation":"linear"},"#,
            r#"{"node_id":2,"kind":"input","activation":"linear"},"#,
            r#"{"node_id":3,"kind":"bias","activation":"linear"},"#,
            r#"{"node_id":4,"kind":"output","activation":"sigmoid"}],"#,
            r#""connections":[{"innovation":4,"from":3,"to":4,"weight":0.5,"enabled":true}]}"#
        );
        assert_eq!(g.canonical_string().unwrap(), expected);
    }

    #[test]
    fn canonical_is_order_insensitive() {
        let g = seed(3);
        let mut shuffled = g.clone();
        shuffled.nodes.reverse();
        shuffled.connections.reverse();
        assert_eq!(g.canonicalize().unwrap(), shuffled.canonicalize().unwrap());
    }

    #[test]
    fn parse_canonical_rejects_whitespace() {
        let g = seed(4);
        let pretty = serde_json::to_vec_pretty(&g).unwrap();
        assert!(Genome::parse(&pretty).is_ok());
        assert!(Genome::parse_canonical(&pretty).is_err());
        assert!(Genome::parse_canonical(&g.canonicalize().unwrap()).is_ok());
    }

    #[test]
    fn rejects_broken_invariants() {
        let base = seed(5);

        let mut g = base.clone();
        g.nodes.retain(|n| n.node_id != BIAS);
        assert!(g.validate().is_err());

        let mut g = base.clone();
        g.connections[1].innovation = 1;
        assert!(g.validate().is_err());

        let mut g = base.clone();
        g.connections.push(ConnectionGene { innovation: 9, from: 0, to: 4, weight: 0.1, enabled: true });
        assert!(g.validate().is_err());

        let mut g = base.clone();
        g.connections.push(ConnectionGene { innovation: 9, from: 4, to: 4, weight: 0.1, enabled: true });
        assert!(g.validate().is_err());

        let mut g = base.clone();
        g.connections.push(ConnectionGene { innovation: 9, from: 4, to: 0, weight: 0.1, enabled: true });
        assert!(g.validate().is_err());

        let mut g = base.clone();
        g.connections[0].weight = 3.5;
        assert!(g.validate().is_err());

        let mut g = base.clone();
        g.connections.push(ConnectionGene { innovation: 9, from: 0, to: 17, weight: 0.1, enabled: true });
        assert!(matches!(g.validate(), Err(GenomeError::DanglingNode(9))));
    }

    #[test]
    fn detects_enabled_cycle_only() {
        let mut nodes = Genome::fixed_nodes(Activation::Linear);
        for id in [5, 6] {
            nodes.push(NodeGene { node_id: id, kind: NodeKind::Hidden, activation: Activation::Sine });
        }
        let conn = |innovation, from, to, enabled| ConnectionGene { innovation, from, to, weight: 1.0, enabled };
        let mut g = Genome::new(nodes, vec![conn(5, 5, 6, true), conn(6, 6, 5, false), conn(7, 6, 4, true)]);
        assert!(g.validate().is_ok());
        g.connections[1].enabled = true;
        assert!(matches!(g.validate(), Err(GenomeError::CycleDetected)));
    }
}
