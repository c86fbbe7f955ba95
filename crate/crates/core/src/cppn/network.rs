use std::collections::{BTreeSet, HashMap};

use super::genome::{Genome, NodeKind, BIAS, INPUT_D, INPUT_X, INPUT_Y, OUTPUT};
use super::{Activation, GenomeError};

/// A genome flattened into a single feed-forward pass.
///
/// Incoming lists follow innovation order, so the floating-point summation
/// order is a function of the canonical genome alone.
#[derive(Debug, Clone)]
pub struct CompiledNetwork {
    node_ids: Vec<u32>,
    kinds: Vec<NodeKind>,
    activations: Vec<Activation>,
    incoming: Vec<Vec<(usize, f64)>>,
    order: Vec<usize>,
    slots: [usize; 5],
}

impl CompiledNetwork {
    /// Node ids in evaluation order.
    pub fn evaluation_order(&self) -> Vec<u32> {
        self.order.iter().map(|&i| self.node_ids[i]).collect()
    }

    /// `(source node id, weight)` pairs feeding node `id`.
    pub fn incoming(&self, id: u32) -> Option<Vec<(u32, f64)>> {
        let idx = self.node_ids.iter().position(|&n| n == id)?;
        Some(self.incoming[idx].iter().map(|&(s, w)| (self.node_ids[s], w)).collect())
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let mut values = vec![0.0; self.node_ids.len()];
        self.evaluate_into(x, y, &mut values)
    }

    /// Same as [`evaluate`](Self::evaluate) with a caller-owned scratch buffer.
    pub fn evaluate_into(&self, x: f64, y: f64, values: &mut Vec<f64>) -> f64 {
        values.clear();
        values.resize(self.node_ids.len(), 0.0);
        values[self.slots[INPUT_X as usize]] = x;
        values[self.slots[INPUT_Y as usize]] = y;
        values[self.slots[INPUT_D as usize]] = (x * x + y * y).sqrt();
        values[self.slots[BIAS as usize]] = 1.0;
        for &i in &self.order {
            if matches!(self.kinds[i], NodeKind::Input | NodeKind::Bias) {
                continue;
            }
            let mut sum = 0.0;
            for &(src, w) in &self.incoming[i] {
                sum += w * values[src];
            }
            values[i] = self.activations[i].apply(sum);
        }
        values[self.slots[OUTPUT as usize]]
    }
}

/// Topologically orders the enabled connection graph (Kahn, smallest node id first).
pub fn compile(genome: &Genome) -> Result<CompiledNetwork, GenomeError> {
    let mut g = genome.clone();
    g.sort();

    let index: HashMap<u32, usize> = g.nodes.iter().enumerate().map(|(i, n)| (n.node_id, i)).collect();
    let mut slots = [0usize; 5];
    for id in INPUT_X..=OUTPUT {
        slots[id as usize] = *index
            .get(&id)
            .ok_or_else(|| GenomeError::Invalid(format!("missing fixed node {id}")))?;
    }

    let n = g.nodes.len();
    let mut incoming = vec![Vec::new(); n];
    let mut outgoing = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for c in g.connections.iter().filter(|c| c.enabled) {
        let (Some(&from), Some(&to)) = (index.get(&c.from), index.get(&c.to)) else {
            return Err(GenomeError::DanglingNode(c.innovation));
        };
        incoming[to].push((from, c.weight));
        outgoing[from].push(to);
        indegree[to] += 1;
    }

    // nodes are sorted by id, so index order is id order
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &t in &outgoing[i] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert(t);
            }
        }
    }
    if order.len() != n {
        return Err(GenomeError::CycleDetected);
    }

    Ok(CompiledNetwork {
        node_ids: g.nodes.iter().map(|n| n.node_id).collect(),
        kinds: g.nodes.iter().map(|n| n.kind).collect(),
        activations: g.nodes.iter().map(|n| n.activation).collect(),
        incoming,
        order,
        slots,
    })
}
