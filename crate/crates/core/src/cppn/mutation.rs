use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::genome::{reachable, ConnectionGene, Genome, NodeGene, NodeKind, WEIGHT_LIMIT};
use super::{Activation, GenomeError, InnovationTable};

/// Variation rates for CPPN genomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    /// Chance that each connection's weight is perturbed.
    pub p_weight_perturb: f64,
    /// Standard deviation of the zero-mean perturbation.
    pub weight_sigma: f64,
    pub p_add_connection: f64,
    pub p_add_node: f64,
    pub p_change_activation: f64,
    /// Used by sessions when at least two parents are selected.
    pub p_crossover: f64,
    pub add_connection_retries: u32,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            p_weight_perturb: 0.8,
            weight_sigma: 0.3,
            p_add_connection: 0.10,
            p_add_node: 0.05,
            p_change_activation: 0.10,
            p_crossover: 0.30,
            add_connection_retries: 20,
        }
    }
}

impl MutationConfig {
    /// Every rate zero: mutation is the identity.
    pub fn none() -> Self {
        MutationConfig {
            p_weight_perturb: 0.0,
            p_add_connection: 0.0,
            p_add_node: 0.0,
            p_change_activation: 0.0,
            p_crossover: 0.0,
            ..MutationConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenomeError> {
        let probs = [
            ("p_weight_perturb", self.p_weight_perturb),
            ("p_add_connection", self.p_add_connection),
            ("p_add_node", self.p_add_node),
            ("p_change_activation", self.p_change_activation),
            ("p_crossover", self.p_crossover),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(GenomeError::Invalid(format!("{name} must be in [0, 1]")));
            }
        }
        if !(self.weight_sigma.is_finite() && self.weight_sigma >= 0.0) {
            return Err(GenomeError::Invalid("weight_sigma must be non-negative".into()));
        }
        Ok(())
    }
}

/// Applies, in order: weight perturbation, add-node, add-connection and
/// activation change. Structural attempts that cannot be carried out are
/// skipped, so the result always satisfies the genome invariants.
pub fn mutate<R: Rng + ?Sized>(
    genome: &Genome,
    cfg: &MutationConfig,
    innos: &mut InnovationTable,
    rng: &mut R,
) -> Genome {
    let mut g = genome.clone();
    g.sort();

    let normal = Normal::new(0.0, cfg.weight_sigma).expect("sigma validated");
    for c in &mut g.connections {
        if rng.random_bool(cfg.p_weight_perturb) {
            c.weight = (c.weight + normal.sample(rng)).clamp(-WEIGHT_LIMIT, WEIGHT_LIMIT);
        }
    }

    if rng.random_bool(cfg.p_add_node) {
        add_node(&mut g, innos, rng);
    }
    if rng.random_bool(cfg.p_add_connection) {
        add_connection(&mut g, cfg.add_connection_retries, innos, rng);
    }
    if rng.random_bool(cfg.p_change_activation) {
        let mutable: Vec<usize> = (0..g.nodes.len())
            .filter(|&i| matches!(g.nodes[i].kind, NodeKind::Hidden | NodeKind::Output))
            .collect();
        if let Some(&i) = mutable.choose(rng) {
            g.nodes[i].activation = *Activation::ALL.choose(rng).expect("non-empty");
        }
    }

    g.sort();
    g
}

/// Splits a random enabled connection `a -> b` into `a -> new -> b`.
fn add_node<R: Rng + ?Sized>(g: &mut Genome, innos: &mut InnovationTable, rng: &mut R) -> bool {
    let enabled: Vec<usize> = (0..g.connections.len()).filter(|&i| g.connections[i].enabled).collect();
    let Some(&split) = enabled.choose(rng) else {
        return false;
    };
    let activation = *Activation::ALL.choose(rng).expect("non-empty");
    let new_id = g.max_node_id() + 1;
    let (from, to, weight) = {
        let c = &g.connections[split];
        (c.from, c.to, c.weight)
    };
    let in_inno = innos.next_innovation(from, new_id);
    let out_inno = innos.next_innovation(new_id, to);
    // a number already carried by this genome under another pair would
    // break innovation uniqueness; happens only across foreign lineages
    if in_inno == out_inno || g.has_innovation(in_inno) || g.has_innovation(out_inno) {
        return false;
    }

    g.connections[split].enabled = false;
    g.nodes.push(NodeGene { node_id: new_id, kind: NodeKind::Hidden, activation });
    g.connections.push(ConnectionGene { innovation: in_inno, from, to: new_id, weight: 1.0, enabled: true });
    g.connections.push(ConnectionGene { innovation: out_inno, from: new_id, to, weight, enabled: true });
    true
}

fn add_connection<R: Rng + ?Sized>(
    g: &mut Genome,
    retries: u32,
    innos: &mut InnovationTable,
    rng: &mut R,
) -> bool {
    let sources: Vec<u32> = g.nodes.iter().filter(|n| n.kind != NodeKind::Output).map(|n| n.node_id).collect();
    let targets: Vec<u32> = g
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Hidden | NodeKind::Output))
        .map(|n| n.node_id)
        .collect();
    for _ in 0..retries {
        let from = *sources.choose(rng).expect("inputs always exist");
        let to = *targets.choose(rng).expect("output always exists");
        // acyclicity is checked over all connections, disabled included, so
        // later re-enabling can never close a loop
        if from == to || g.has_pair(from, to) || reachable(g, to, from) {
            continue;
        }
        let innovation = match innos.lookup(from, to) {
            Some(n) if g.has_innovation(n) => continue,
            Some(n) => n,
            None => {
                let n = innos.next_innovation(from, to);
                if g.has_innovation(n) {
                    continue;
                }
                n
            }
        };
        let weight = rng.random_range(-1.0..=1.0);
        g.connections.push(ConnectionGene { innovation, from, to, weight, enabled: true });
        return true;
    }
    false
}
