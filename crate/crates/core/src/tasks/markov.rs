//! Order-1 Markov chain over a small alphabet.
//!
//! The policy samples `y_1` from the initial law and each later symbol from
//! the row of its predecessor. Verifiers compare ranges of the trajectory
//! with a fixed target sequence.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DecomposeError, Enumerable, PolicyError, Task, VerifyError};
use crate::forward::sample_index;
use crate::goal::{Goal, GoalSpec};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MarkovError {
    #[error("alphabet must be non-empty")]
    EmptyAlphabet,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("{what} has {got} entries, expected {want}")]
    Shape { what: &'static str, got: usize, want: usize },
    #[error("{what} must be strictly positive and sum to 1")]
    NotADistribution { what: String },
    #[error("block boundaries must be increasing and inside (0, {horizon})")]
    BadBoundaries { horizon: usize },
    #[error("target symbol {0} outside the alphabet")]
    BadTarget(usize),
}

/// Symbol ranges `[start, end)` (0-based positions) of the target sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovTask {
    init: Vec<f64>,
    transitions: Vec<Vec<f64>>,
    horizon: usize,
    /// Interior block starts, 0-based.
    boundaries: Vec<usize>,
    target: Vec<usize>,
}

fn check_distribution(what: String, p: &[f64]) -> Result<(), MarkovError> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&x| !(x > 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(MarkovError::NotADistribution { what });
    }
    Ok(())
}

impl MarkovTask {
    pub fn new(
        init: Vec<f64>,
        transitions: Vec<Vec<f64>>,
        horizon: usize,
        boundaries: Vec<usize>,
        target: Option<Vec<usize>>,
    ) -> Result<Self, MarkovError> {
        let a = init.len();
        if a == 0 {
            return Err(MarkovError::EmptyAlphabet);
        }
        if horizon == 0 {
            return Err(MarkovError::ZeroHorizon);
        }
        check_distribution("initial law".into(), &init)?;
        if transitions.len() != a {
            return Err(MarkovError::Shape { what: "transition matrix", got: transitions.len(), want: a });
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != a {
                return Err(MarkovError::Shape { what: "transition row", got: row.len(), want: a });
            }
            check_distribution(format!("transition row {i}"), row)?;
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) || boundaries.iter().any(|&b| b == 0 || b >= horizon) {
            return Err(MarkovError::BadBoundaries { horizon });
        }
        let target = target.unwrap_or_else(|| vec![0; horizon]);
        if target.len() != horizon {
            return Err(MarkovError::Shape { what: "target", got: target.len(), want: horizon });
        }
        if let Some(&bad) = target.iter().find(|&&s| s >= a) {
            return Err(MarkovError::BadTarget(bad));
        }
        Ok(Self { init, transitions, horizon, boundaries, target })
    }

    /// Symmetric two-state chain that stays put with probability `stay`,
    /// uniform start, split into `k` near-equal blocks.
    pub fn two_state(stay: f64, horizon: usize, k: usize) -> Result<Self, MarkovError> {
        let rows = vec![vec![stay, 1.0 - stay], vec![1.0 - stay, stay]];
        Self::new(vec![0.5, 0.5], rows, horizon, even_boundaries(horizon, k), None)
    }

    /// Same law at every step: each row equals `p`.
    pub fn iid(p: Vec<f64>, horizon: usize, k: usize) -> Result<Self, MarkovError> {
        let rows = vec![p.clone(); p.len()];
        Self::new(p, rows, horizon, even_boundaries(horizon, k), None)
    }

    pub fn alphabet(&self) -> usize {
        self.init.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Blocks as `[start, end)` ranges covering `0..horizon`.
    pub fn blocks(&self) -> Vec<MatchRange> {
        let mut cuts = vec![0];
        cuts.extend(&self.boundaries);
        cuts.push(self.horizon);
        cuts.windows(2).map(|w| MatchRange { start: w[0], end: w[1] }).collect()
    }

    pub fn with_horizon(&self, horizon: usize, k: usize) -> Result<Self, MarkovError> {
        Self::new(self.init.clone(), self.transitions.clone(), horizon, even_boundaries(horizon, k), None)
    }

    /// `log P(y_1 .. y_n)` in nats.
    pub fn log_prob(&self, steps: &[usize]) -> f64 {
        let mut lp = 0.0;
        for (t, &s) in steps.iter().enumerate() {
            lp += if t == 0 { self.init[s].ln() } else { self.transitions[steps[t - 1]][s].ln() };
        }
        lp
    }

    /// Largest single-step surprise, over the initial law and every
    /// transition entry.
    pub fn max_step_surprise(&self) -> f64 {
        self.init
            .iter()
            .chain(self.transitions.iter().flatten())
            .map(|p| -p.ln())
            .fold(0.0, f64::max)
    }

    /// Samples `y_t` given the previous symbol (`None` at `t = 1`).
    pub fn sample_next(&self, prev: Option<usize>, rng: &mut dyn RngCore) -> usize {
        let row = match prev {
            None => &self.init,
            Some(s) => &self.transitions[s],
        };
        sample_index(row, rng)
    }
}

/// Interior boundaries splitting `0..horizon` into `k` near-equal blocks.
pub fn even_boundaries(horizon: usize, k: usize) -> Vec<usize> {
    let k = k.clamp(1, horizon.max(1));
    let mut out: Vec<usize> = (1..k).map(|j| j * horizon / k).collect();
    out.dedup();
    out.retain(|&b| b > 0 && b < horizon);
    out
}

impl Task for MarkovTask {
    type Step = usize;
    type Check = MatchRange;

    fn name(&self) -> &'static str {
        "markov"
    }

    fn next_step(&self, prefix: &[usize], rng: &mut dyn RngCore) -> Result<usize, PolicyError> {
        Ok(self.sample_next(prefix.last().copied(), rng))
    }

    fn is_terminal(&self, steps: &[usize]) -> bool {
        steps.len() >= self.horizon
    }

    fn root_goal(&self) -> GoalSpec<MatchRange> {
        GoalSpec::new("match the target sequence", MatchRange { start: 0, end: self.horizon })
    }

    /// Fraction of positions in the range that hold the target symbol;
    /// missing positions count as misses.
    fn verify(&self, r: &MatchRange, t: &Trajectory<usize>) -> Result<f64, VerifyError> {
        if r.start >= r.end || r.end > self.horizon {
            return Err(VerifyError(format!("bad range {}..{}", r.start, r.end)));
        }
        let hits = (r.start..r.end).filter(|&i| t.steps.get(i) == Some(&self.target[i])).count();
        Ok(hits as f64 / (r.end - r.start) as f64)
    }

    /// Splits at the block boundaries inside the range when there are one to
    /// three of them, otherwise at the midpoint.
    fn decompose(&self, leaf: &Goal<MatchRange>, _rng: &mut dyn RngCore) -> Result<Vec<GoalSpec<MatchRange>>, DecomposeError> {
        let MatchRange { start, end } = leaf.check;
        if end - start < 2 {
            return Err(DecomposeError::AtomicGoal);
        }
        let inner: Vec<usize> = self.boundaries.iter().copied().filter(|&b| b > start && b < end).collect();
        let cuts = if (1..=3).contains(&inner.len()) { inner } else { vec![start + (end - start) / 2] };
        let mut edges = vec![start];
        edges.extend(cuts);
        edges.push(end);
        Ok(edges
            .windows(2)
            .map(|w| GoalSpec::new(format!("match positions {}..{}", w[0] + 1, w[1]), MatchRange { start: w[0], end: w[1] }))
            .collect())
    }
}

impl Enumerable for MarkovTask {
    fn candidate_steps(&self, _prefix: &[usize]) -> Vec<usize> {
        (0..self.alphabet()).collect()
    }
}
