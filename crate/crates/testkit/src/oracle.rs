use std::collections::{HashMap, HashSet};

use rand::Rng;
use win_core::cppn::{mutate, Activation, Genome, InnovationTable, MutationConfig, NodeKind};

/// Every genome invariant that does not hold, checked with plain sets and a
/// colouring DFS for cycles.
pub fn genome_violations(g: &Genome) -> Vec<String> {
    let mut out = Vec::new();

    let mut ids = HashSet::new();
    for n in &g.nodes {
        if !ids.insert(n.node_id) {
            out.push(format!("node id {} repeated", n.node_id));
        }
    }
    let fixed = [
        (0, NodeKind::Input),
        (1, NodeKind::Input),
        (2, NodeKind::Input),
        (3, NodeKind::Bias),
        (4, NodeKind::Output),
    ];
    let kind_of: HashMap<u32, NodeKind> = g.nodes.iter().map(|n| (n.node_id, n.kind)).collect();
    for (id, kind) in fixed {
        if kind_of.get(&id) != Some(&kind) {
            out.push(format!("fixed node {id} missing or not {kind:?}"));
        }
    }
    for n in &g.nodes {
        if n.node_id > 4 && n.kind != NodeKind::Hidden {
            out.push(format!("node {} should be hidden", n.node_id));
        }
    }

    let mut innovations = HashSet::new();
    let mut pairs = HashSet::new();
    for c in &g.connections {
        if !innovations.insert(c.innovation) {
            out.push(format!("innovation {} repeated", c.innovation));
        }
        if !pairs.insert((c.from, c.to)) {
            out.push(format!("pair {}->{} repeated", c.from, c.to));
        }
        match kind_of.get(&c.to) {
            None => out.push(format!("connection {} targets missing node", c.innovation)),
            Some(NodeKind::Input | NodeKind::Bias) => out.push(format!("connection {} targets an input", c.innovation)),
            _ => {}
        }
        match kind_of.get(&c.from) {
            None => out.push(format!("connection {} leaves missing node", c.innovation)),
            Some(NodeKind::Output) => out.push(format!("connection {} leaves the output", c.innovation)),
            _ => {}
        }
        if !(c.weight.is_finite() && (-3.0..=3.0).contains(&c.weight)) {
            out.push(format!("connection {} weight {} out of range", c.innovation, c.weight));
        }
    }

    // 0 = white, 1 = on stack, 2 = done
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for c in g.connections.iter().filter(|c| c.enabled) {
        adj.entry(c.from).or_default().push(c.to);
    }
    let mut colour: HashMap<u32, u8> = HashMap::new();
    fn dfs(n: u32, adj: &HashMap<u32, Vec<u32>>, colour: &mut HashMap<u32, u8>) -> bool {
        colour.insert(n, 1);
        for &m in adj.get(&n).into_iter().flatten() {
            match colour.get(&m).copied().unwrap_or(0) {
                1 => return true,
                0 if dfs(m, adj, colour) => return true,
                _ => {}
            }
        }
        colour.insert(n, 2);
        false
    }
    let mut starts: Vec<u32> = adj.keys().copied().collect();
    starts.sort_unstable();
    for n in starts {
        if colour.get(&n).copied().unwrap_or(0) == 0 && dfs(n, &adj, &mut colour) {
            out.push("enabled connections contain a cycle".into());
            break;
        }
    }
    out
}

fn activate(a: Activation, v: f64) -> f64 {
    match a {
        Activation::Linear => v,
        Activation::Sigmoid => 2.0 / (1.0 + (-4.9 * v).exp()) - 1.0,
        Activation::Sine => v.sin(),
        Activation::Cosine => v.cos(),
        Activation::Gaussian => (-(v * v)).exp(),
    }
}

/// Output of a genome at `(x, y)` by memoised recursion from the output node.
/// Incoming terms are summed in innovation order.
pub fn recursive_evaluate(g: &Genome, x: f64, y: f64) -> f64 {
    fn value(id: u32, g: &Genome, x: f64, y: f64, memo: &mut HashMap<u32, f64>) -> f64 {
        if let Some(&v) = memo.get(&id) {
            return v;
        }
        let v = match id {
            0 => x,
            1 => y,
            2 => (x * x + y * y).sqrt(),
            3 => 1.0,
            _ => {
                let mut incoming: Vec<_> = g.connections.iter().filter(|c| c.enabled && c.to == id).collect();
                incoming.sort_by_key(|c| c.innovation);
                let mut sum = 0.0;
                for c in incoming {
                    sum += c.weight * value(c.from, g, x, y, memo);
                }
                let node = g.nodes.iter().find(|n| n.node_id == id).expect("node exists");
                activate(node.activation, sum)
            }
        };
        memo.insert(id, v);
        v
    }
    value(4, g, x, y, &mut HashMap::new())
}

/// A genome grown from a random seed by structural mutation until it has at
/// least `min_nodes` nodes.
pub fn grow_genome<R: Rng>(rng: &mut R, min_nodes: usize, innos: &mut InnovationTable) -> Genome {
    let cfg = MutationConfig {
        p_add_node: 0.6,
        p_add_connection: 0.8,
        p_change_activation: 0.5,
        ..MutationConfig::default()
    };
    let mut g = Genome::random_seed(rng);
    innos.absorb(&g);
    let mut rounds = 0;
    while g.nodes.len() < min_nodes && rounds < 10_000 {
        g = mutate(&g, &cfg, innos, rng);
        rounds += 1;
    }
    g
}
