//! Joint versus separate satisfaction of `m` independent sub-goals.
//!
//! A candidate is one fresh rollout of the Bernoulli task: it satisfies each
//! sub-goal independently with probability `p`. `N_term` counts candidates
//! until one satisfies all of them at once; `N_bidir` counts candidates until
//! every sub-goal has been satisfied by at least one of them.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Check, Moments, TheoryError, CHUNK};
use crate::tasks::bernoulli::BernoulliTask;
use crate::tasks::rollout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgoalExperimentConfig {
    pub m: usize,
    pub p: f64,
    pub delta: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SubgoalExperimentConfig {
    fn default() -> Self {
        Self { m: 4, p: 0.5, delta: 0.1, trials: 10_000, seed: 0 }
    }
}

impl SubgoalExperimentConfig {
    pub fn validate(&self) -> Result<(), TheoryError> {
        if self.m == 0 {
            return Err(TheoryError::Invalid("m must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(TheoryError::Invalid(format!("p must lie in (0, 1), got {}", self.p)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(TheoryError::Invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.trials == 0 {
            return Err(TheoryError::Invalid("trials must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgoalReport {
    pub m: usize,
    pub p: f64,
    pub delta: f64,
    pub trials: usize,
    pub n_term_mean: f64,
    pub n_term_se: f64,
    /// `(1 − δ)`-quantile of the separate-coverage count.
    pub n_bidir_quantile: f64,
    pub n_bidir_mean: f64,
    pub n_bidir_se: f64,
    /// `n_term_mean / n_bidir_quantile`.
    pub ratio: f64,
    /// `1 / p^m`.
    pub n_term_expected: f64,
    /// `ln(m / δ) / p`.
    pub n_bidir_bound: f64,
    pub checks: Vec<Check>,
}

const CANDIDATE_CAP: usize = 1 << 24;

fn candidate(task: &BernoulliTask, rng: &mut dyn RngCore) -> Vec<bool> {
    let m = task.m();
    let (t, _) = rollout(task, m, m, rng);
    task.satisfied(&t.steps)
}

fn one_trial(task: &BernoulliTask, rng: &mut dyn RngCore) -> (usize, usize) {
    let mut n_term = 0;
    while n_term < CANDIDATE_CAP {
        n_term += 1;
        if candidate(task, rng).iter().all(|&s| s) {
            break;
        }
    }
    let mut covered = vec![false; task.m()];
    let mut n_bidir = 0;
    while n_bidir < CANDIDATE_CAP && !covered.iter().all(|&c| c) {
        n_bidir += 1;
        for (c, s) in covered.iter_mut().zip(candidate(task, rng)) {
            *c |= s;
        }
    }
    (n_term, n_bidir)
}

/// Smallest sample value `x` with empirical `Pr[X ≤ x] ≥ q`.
pub fn empirical_quantile(values: &mut [usize], q: f64) -> usize {
    values.sort_unstable();
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

pub fn subgoal_experiment(cfg: &SubgoalExperimentConfig) -> Result<SubgoalReport, TheoryError> {
    cfg.validate()?;
    let task = BernoulliTask::uniform(cfg.m, cfg.p).map_err(|e| TheoryError::Invalid(e.to_string()))?;
    let chunks = cfg.trials.div_ceil(CHUNK);
    let counts: Vec<(usize, usize)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((cfg.m as u64) << 32) + c as u64);
            let n = CHUNK.min(cfg.trials - c * CHUNK);
            (0..n).map(|_| one_trial(&task, &mut rng)).collect::<Vec<_>>()
        })
        .collect();
    let (mut term, mut bidir) = (Moments::default(), Moments::default());
    for &(t, b) in &counts {
        term.push(t as f64);
        bidir.push(b as f64);
    }
    let mut b_values: Vec<usize> = counts.iter().map(|c| c.1).collect();
    let quantile = empirical_quantile(&mut b_values, 1.0 - cfg.delta) as f64;
    let (term, bidir) = (term.estimate(), bidir.estimate());
    let n_term_expected = cfg.p.powi(cfg.m as i32).recip();
    let n_bidir_bound = (cfg.m as f64 / cfg.delta).ln() / cfg.p;
    let ratio = term.mean / quantile;
    let checks = vec![
        Check::new(
            "N_term within 10% of 1/p^m",
            (term.mean - n_term_expected).abs() <= 0.1 * n_term_expected,
            format!("{:.3} vs {:.3}", term.mean, n_term_expected),
        ),
        Check::new(
            "N_bidir quantile <= ln(m/delta)/p",
            quantile <= n_bidir_bound,
            format!("{quantile} vs {n_bidir_bound:.3}"),
        ),
    ];
    Ok(SubgoalReport {
        m: cfg.m,
        p: cfg.p,
        delta: cfg.delta,
        trials: cfg.trials,
        n_term_mean: term.mean,
        n_term_se: term.se,
        n_bidir_quantile: quantile,
        n_bidir_mean: bidir.mean,
        n_bidir_se: bidir.se,
        ratio,
        n_term_expected,
        n_bidir_bound,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_picks_order_statistic() {
        let mut v = vec![5, 1, 4, 2, 3, 6, 7, 8, 9, 10];
        assert_eq!(empirical_quantile(&mut v, 0.9), 9);
        assert_eq!(empirical_quantile(&mut v, 0.05), 1);
        assert_eq!(empirical_quantile(&mut v, 1.0), 10);
    }

    #[test]
    fn rejects_bad_parameters() {
        for cfg in [
            SubgoalExperimentConfig { p: 1.5, ..Default::default() },
            SubgoalExperimentConfig { p: 0.0, ..Default::default() },
            SubgoalExperimentConfig { delta: 1.0, ..Default::default() },
            SubgoalExperimentConfig { m: 0, ..Default::default() },
        ] {
            assert!(subgoal_experiment(&cfg).is_err());
        }
    }

    #[test]
    fn single_goal_counts_coincide_in_mean() {
        let r = subgoal_experiment(&SubgoalExperimentConfig { m: 1, trials: 20_000, ..Default::default() }).unwrap();
        assert!((r.n_term_mean - 2.0).abs() < 4.0 * r.n_term_se);
        assert!((r.n_bidir_mean - 2.0).abs() < 4.0 * r.n_bidir_se);
    }
}
