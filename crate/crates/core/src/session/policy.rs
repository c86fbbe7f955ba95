use rand::{Rng, RngCore};

use super::SessionError;
use crate::domains::Domain;

/// Stands in for the human in automated runs.
pub trait SelectionPolicy {
    fn name(&self) -> &str;

    /// Non-empty set of candidate indices to breed from.
    fn choose(&mut self, candidates: &[&str], domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<Vec<usize>, SessionError>;

    /// The single candidate worth publishing (or branching from).
    fn best(&mut self, candidates: &[&str], domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<usize, SessionError>;
}

/// Picks two distinct candidates uniformly at random.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl SelectionPolicy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn choose(&mut self, candidates: &[&str], _domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<Vec<usize>, SessionError> {
        match candidates.len() {
            0 => Err(SessionError::EmptySelection),
            1 => Ok(vec![0]),
            n => {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                Ok(vec![i, j])
            }
        }
    }

    fn best(&mut self, candidates: &[&str], _domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<usize, SessionError> {
        if candidates.is_empty() {
            return Err(SessionError::EmptySelection);
        }
        Ok(rng.random_range(0..candidates.len()))
    }
}

/// Keeps the single fittest candidate; lowest index wins ties.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneMaxPolicy;

impl OneMaxPolicy {
    fn argmax(candidates: &[&str], domain: &dyn Domain) -> Result<usize, SessionError> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in candidates.iter().enumerate() {
            let f = domain
                .fitness(c)
                .ok_or_else(|| SessionError::InvalidArgument("onemax policy needs a domain with a fitness".into()))?;
            if best.is_none_or(|(_, b)| f > b) {
                best = Some((i, f));
            }
        }
        best.map(|(i, _)| i).ok_or(SessionError::EmptySelection)
    }
}

impl SelectionPolicy for OneMaxPolicy {
    fn name(&self) -> &str {
        "onemax"
    }

    fn choose(&mut self, candidates: &[&str], domain: &dyn Domain, _rng: &mut dyn RngCore) -> Result<Vec<usize>, SessionError> {
        Ok(vec![OneMaxPolicy::argmax(candidates, domain)?])
    }

    fn best(&mut self, candidates: &[&str], domain: &dyn Domain, _rng: &mut dyn RngCore) -> Result<usize, SessionError> {
        OneMaxPolicy::argmax(candidates, domain)
    }
}

pub fn policy_by_name(name: &str) -> Option<Box<dyn SelectionPolicy>> {
    match name {
        "random" => Some(Box::new(RandomPolicy)),
        "onemax" => Some(Box::new(OneMaxPolicy)),
        _ => None,
    }
}
