use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use super::genome::{reachable, ConnectionGene, Genome};
use super::GenomeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Matching { enabled_from_b: bool },
    Disjoint,
}

/// NEAT crossover without fitness.
///
/// Genes match when both parents carry the same innovation on the same
/// `(from, to)` pair; a matching gene is copied from either parent with equal
/// chance. Every other gene of `a` (the first-selected parent) is inherited
/// and every other gene of `b` is dropped. Node genes come from `a`.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome, GenomeError> {
    a.validate()
        .map_err(|e| GenomeError::Incompatible(format!("first parent: {e}")))?;
    b.validate()
        .map_err(|e| GenomeError::Incompatible(format!("second parent: {e}")))?;

    let b_genes: BTreeMap<u32, &ConnectionGene> = b.connections.iter().map(|c| (c.innovation, c)).collect();
    let mut a_sorted = a.clone();
    a_sorted.sort();

    let mut genes: Vec<(ConnectionGene, Origin)> = Vec::with_capacity(a_sorted.connections.len());
    for ga in &a_sorted.connections {
        match b_genes.get(&ga.innovation) {
            Some(gb) if gb.from == ga.from && gb.to == ga.to => {
                let take_b = rng.random_bool(0.5);
                let gene = if take_b { (*gb).clone() } else { ga.clone() };
                let enabled_from_b = take_b && gb.enabled && !ga.enabled;
                genes.push((gene, Origin::Matching { enabled_from_b }));
            }
            _ => genes.push((ga.clone(), Origin::Disjoint)),
        }
    }

    let mut child = Genome { nodes: a_sorted.nodes.clone(), connections: Vec::new() };
    loop {
        child.connections = genes.iter().map(|(g, _)| g.clone()).collect();
        let on_cycle: HashSet<u32> = child
            .connections
            .iter()
            .filter(|c| c.enabled && enabled_path(&child, c.to, c.from))
            .map(|c| c.innovation)
            .collect();
        if on_cycle.is_empty() {
            break;
        }
        // drop the newest offending disjoint gene; otherwise fall back to the
        // first parent's disabled flag for the newest re-enabled match
        let victim = genes
            .iter()
            .rposition(|(g, o)| *o == Origin::Disjoint && g.enabled && on_cycle.contains(&g.innovation));
        if let Some(i) = victim {
            genes.remove(i);
            continue;
        }
        let revert = genes.iter().rposition(|(g, o)| {
            matches!(o, Origin::Matching { enabled_from_b: true }) && on_cycle.contains(&g.innovation)
        });
        match revert {
            Some(i) => {
                genes[i].0.enabled = false;
                genes[i].1 = Origin::Matching { enabled_from_b: false };
            }
            None => return Err(GenomeError::CycleDetected),
        }
    }

    child.sort();
    debug_assert!(child.validate().is_ok());
    Ok(child)
}

fn enabled_path(g: &Genome, start: u32, target: u32) -> bool {
    let enabled = Genome {
        nodes: Vec::new(),
        connections: g.connections.iter().filter(|c| c.enabled).cloned().collect(),
    };
    reachable(&enabled, start, target)
}
