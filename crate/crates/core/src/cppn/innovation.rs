use std::collections::BTreeMap;

use super::genome::{Genome, OUTPUT, SEED_INNOVATIONS};

/// Assigns historical markings to structural connection additions.
///
/// A table is scoped to one session. The same `(from, to)` pair always maps to
/// the same number for the lifetime of the table; new pairs get the next
/// counter value. The counter starts after the four seed innovations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnovationTable {
    pairs: BTreeMap<(u32, u32), u32>,
    last: u32,
}

impl Default for InnovationTable {
    fn default() -> Self {
        InnovationTable::new()
    }
}

impl InnovationTable {
    pub fn new() -> InnovationTable {
        InnovationTable { pairs: BTreeMap::new(), last: SEED_INNOVATIONS }
    }

    /// A table that already knows every connection of `genomes`. The first
    /// genome to mention a pair wins if two disagree on its number.
    pub fn from_genomes<'a>(genomes: impl IntoIterator<Item = &'a Genome>) -> InnovationTable {
        let mut table = InnovationTable::new();
        for g in genomes {
            table.absorb(g);
        }
        table
    }

    /// A table pre-loaded with the four seed connections `i -> output` = `i + 1`.
    pub fn with_seed_connections() -> InnovationTable {
        let mut table = InnovationTable::new();
        for i in 0..SEED_INNOVATIONS {
            table.pairs.insert((i, OUTPUT), i + 1);
        }
        table
    }

    /// Records the pairs of `genome` that the table has not seen yet.
    pub fn absorb(&mut self, genome: &Genome) {
        for c in &genome.connections {
            self.pairs.entry((c.from, c.to)).or_insert(c.innovation);
            self.last = self.last.max(c.innovation);
        }
    }

    pub fn next_innovation(&mut self, from: u32, to: u32) -> u32 {
        if let Some(&n) = self.pairs.get(&(from, to)) {
            return n;
        }
        self.last += 1;
        self.pairs.insert((from, to), self.last);
        self.last
    }

    pub fn lookup(&self, from: u32, to: u32) -> Option<u32> {
        self.pairs.get(&(from, to)).copied()
    }

    /// Highest number handed out so far.
    pub fn counter(&self) -> u32 {
        self.last
    }
}
