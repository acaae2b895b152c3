use rand::Rng;
use thiserror::Error;

use crate::pool::{EntryId, PoolEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("no eligible candidates")]
    EmptyEligibleSet,
    #[error("pair selection needs at least two candidates")]
    TooFewCandidates,
    #[error("temperature must be positive")]
    InvalidTemperature,
}

/// The fields of a pool entry that selection looks at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub id: EntryId,
    pub score: f64,
    pub degree: usize,
}

impl<S> From<&PoolEntry<S>> for Candidate {
    fn from(e: &PoolEntry<S>) -> Self {
        Self { id: e.id, score: e.score, degree: e.degree }
    }
}

/// Numerically stable `softmax(logits / tau)`.
pub fn boltzmann_probabilities(logits: &[f64], tau: f64) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|&x| ((x - max) / tau).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Inverse-CDF draw from a normalized probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the final partial sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Score plus the unexplored bonus for childless candidates.
pub fn bonus_score(c: &Candidate, lambda: f64) -> f64 {
    c.score + if c.degree == 0 { lambda } else { 0.0 }
}

pub fn single_parent_probabilities(eligible: &[Candidate], tau: f64, lambda: f64) -> Vec<f64> {
    let logits: Vec<f64> = eligible.iter().map(|c| bonus_score(c, lambda)).collect();
    boltzmann_probabilities(&logits, tau)
}

/// Boltzmann draw over `score + lambda * [degree == 0]`. Returns the index
/// into `eligible`.
pub fn select_single_parent<R: Rng + ?Sized>(
    eligible: &[Candidate],
    tau: f64,
    lambda: f64,
    rng: &mut R,
) -> Result<usize, SelectionError> {
    if eligible.is_empty() {
        return Err(SelectionError::EmptyEligibleSet);
    }
    if !(tau > 0.0) {
        return Err(SelectionError::InvalidTemperature);
    }
    let probs = single_parent_probabilities(eligible, tau, lambda);
    Ok(sample_index(&probs, rng))
}

/// Candidate unordered pairs as index pairs into `eligible`: all of them up
/// to `cap` candidates, otherwise `cap * n` random distinct-element pairs.
pub fn candidate_pairs<R: Rng + ?Sized>(n: usize, cap: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if n <= cap {
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        pairs
    } else {
        (0..cap * n)
            .map(|_| {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                (i.min(j), i.max(j))
            })
            .collect()
    }
}

/// Boltzmann draw over unordered pairs scored by `pair_score`. Returns
/// indices into `eligible`, ordered so the lower pool id comes first.
pub fn select_parent_pair<R, F>(
    eligible: &[Candidate],
    mut pair_score: F,
    tau: f64,
    cap: usize,
    rng: &mut R,
) -> Result<(usize, usize), SelectionError>
where
    R: Rng + ?Sized,
    F: FnMut(&Candidate, &Candidate) -> f64,
{
    if eligible.len() < 2 {
        return Err(SelectionError::TooFewCandidates);
    }
    if !(tau > 0.0) {
        return Err(SelectionError::InvalidTemperature);
    }
    let pairs = candidate_pairs(eligible.len(), cap, rng);
    let logits: Vec<f64> = pairs.iter().map(|&(i, j)| pair_score(&eligible[i], &eligible[j])).collect();
    let probs = boltzmann_probabilities(&logits, tau);
    let (i, j) = pairs[sample_index(&probs, rng)];
    Ok(if eligible[i].id <= eligible[j].id { (i, j) } else { (j, i) })
}

/// Linear temperature schedule from `tau_0` at step 0 to `tau_end` at
/// `total_steps`; steps past the end hold `tau_end`.
pub fn anneal_tau(step: usize, total_steps: usize, tau_0: f64, tau_end: f64) -> f64 {
    let total = total_steps.max(1);
    let step = step.min(total);
    tau_0 + (tau_end - tau_0) * step as f64 / total as f64
}
