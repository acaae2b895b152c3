//! Entropy-shell confinement of expansion rollouts versus block splicing.
//!
//! For each horizon `T` the experiment draws expansion rollouts from the
//! chain and counts how often their surprise `−log P(Y)` leaves the shell
//! `|−log P(Y) − H_T| ≤ εT`. It also draws evolution candidates whose `k`
//! blocks come from independent rollouts (the product of the block
//! marginals) and measures their mean surprise under the chain, which
//! should sit at least `TC` above `H_T`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::entropy::{exact_block_total_correlation, exact_trajectory_entropy, per_step_entropy};
use super::{sample_chunks, Check, Moments, TheoryError};
use crate::forward::crossover;
use crate::tasks::markov::MarkovTask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellPreset {
    /// Two states, rows (0.9, 0.1) / (0.1, 0.9).
    Correlated,
    /// Every row (0.7, 0.3).
    Iid,
}

impl ShellPreset {
    pub fn task(self) -> MarkovTask {
        let built = match self {
            ShellPreset::Correlated => MarkovTask::two_state(0.9, 16, 2),
            ShellPreset::Iid => MarkovTask::iid(vec![0.7, 0.3], 16, 2),
        };
        built.expect("preset chains are valid")
    }
}

#[derive(Debug, Clone)]
pub struct ShellExperimentConfig {
    /// Chain law; its own horizon and boundaries are ignored.
    pub task: MarkovTask,
    /// Shell half-width per step. Defaults to `0.05 ·` mean marginal entropy.
    pub epsilon: Option<f64>,
    pub k_blocks: usize,
    pub n_samples: usize,
    pub horizons: Vec<usize>,
    pub seed: u64,
}

impl ShellExperimentConfig {
    pub fn preset(preset: ShellPreset) -> Self {
        Self { task: preset.task(), epsilon: None, k_blocks: 2, n_samples: 100_000, horizons: vec![16, 32, 64], seed: 0 }
    }

    pub fn validate(&self) -> Result<(), TheoryError> {
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(TheoryError::Invalid(format!("epsilon must be positive, got {eps}")));
            }
        }
        if self.k_blocks < 2 {
            return Err(TheoryError::Invalid(format!("need at least 2 blocks, got {}", self.k_blocks)));
        }
        if self.n_samples < 2 {
            return Err(TheoryError::Invalid("need at least 2 samples".into()));
        }
        if self.horizons.is_empty() {
            return Err(TheoryError::Invalid("no horizons given".into()));
        }
        if let Some(&t) = self.horizons.iter().find(|&&t| t < self.k_blocks) {
            return Err(TheoryError::Invalid(format!("horizon {t} is shorter than {} blocks", self.k_blocks)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellRow {
    pub horizon: usize,
    pub epsilon: f64,
    pub h_t: f64,
    pub tc_exact: f64,
    pub max_step_surprise: f64,
    pub expansion_escape_rate: f64,
    pub expansion_escape_se: f64,
    pub evolution_mean_surprise: f64,
    pub evolution_surprise_se: f64,
    /// `evolution_mean_surprise − h_t`.
    pub evolution_gap: f64,
    pub evolution_in_shell_rate: f64,
    pub evolution_in_shell_se: f64,
    /// Upper bound on the in-shell fraction implied by `tc_exact`; above 1
    /// when `TC/T ≤ ε`.
    pub in_shell_bound: f64,
    /// Supplementary: per-step surprise of crossover children of two
    /// independent rollouts, next to `h_t / T`.
    pub crossover_surprise_per_step: f64,
    pub crossover_surprise_per_step_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellReport {
    pub rows: Vec<ShellRow>,
    pub checks: Vec<Check>,
}

impl ShellReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn sample_path<R: Rng>(task: &MarkovTask, len: usize, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let prev = out.last().copied();
        out.push(task.sample_next(prev, rng));
    }
    out
}

fn run_horizon(cfg: &ShellExperimentConfig, horizon: usize) -> Result<ShellRow, TheoryError> {
    let task = cfg.task.with_horizon(horizon, cfg.k_blocks)?;
    let h_t = exact_trajectory_entropy(&task, horizon)?;
    let tc = exact_block_total_correlation(&task, task.boundaries())?;
    let epsilon = match cfg.epsilon {
        Some(e) => e,
        None => 0.05 * per_step_entropy(&task, horizon)?,
    };
    let width = epsilon * horizon as f64;
    let blocks = task.blocks();
    let stream = (horizon as u64) << 32;
    let m = sample_chunks(cfg.seed, stream, cfg.n_samples, |rng, n| {
        let mut acc = vec![Moments::default(); 4];
        for _ in 0..n {
            let y = sample_path(&task, horizon, rng);
            let s = -task.log_prob(&y);
            acc[0].push(f64::from((s - h_t).abs() > width));

            let mut spliced = Vec::with_capacity(horizon);
            for b in &blocks {
                let donor = sample_path(&task, b.end, rng);
                spliced.extend_from_slice(&donor[b.start..]);
            }
            let s = -task.log_prob(&spliced);
            acc[1].push(s);
            acc[2].push(f64::from((s - h_t).abs() <= width));

            let other = sample_path(&task, horizon, rng);
            if let Ok((child, _, _)) = crossover(&y, &other, rng) {
                acc[3].push(-task.log_prob(&child) / child.len() as f64);
            }
        }
        acc
    });
    let (escape, surprise, inside, cross) = (m[0].estimate(), m[1].estimate(), m[2].estimate(), m[3].estimate());
    let l = task.max_step_surprise();
    let t = horizon as f64;
    let denom = l * t - h_t - width;
    let in_shell_bound = if denom > 0.0 { 1.0 - (tc / t - epsilon) * t / denom } else { f64::INFINITY };
    Ok(ShellRow {
        horizon,
        epsilon,
        h_t,
        tc_exact: tc,
        max_step_surprise: l,
        expansion_escape_rate: escape.mean,
        expansion_escape_se: escape.se,
        evolution_mean_surprise: surprise.mean,
        evolution_surprise_se: surprise.se,
        evolution_gap: surprise.mean - h_t,
        evolution_in_shell_rate: inside.mean,
        evolution_in_shell_se: inside.se,
        in_shell_bound,
        crossover_surprise_per_step: cross.mean,
        crossover_surprise_per_step_se: cross.se,
    })
}

fn checks(rows: &[ShellRow]) -> Vec<Check> {
    let mut out = Vec::new();
    let rates: Vec<f64> = rows.iter().map(|r| r.expansion_escape_rate).collect();
    if rows.len() > 1 {
        let decreasing = rates.windows(2).all(|w| w[1] < w[0]);
        out.push(Check::new("expansion escape rate decreases with T", decreasing, format!("{rates:?}")));
    }
    for r in rows {
        let floor = r.h_t + r.tc_exact - 3.0 * r.evolution_surprise_se;
        out.push(Check::new(
            format!("T={}: evolution surprise >= H_T + TC - 3 SE", r.horizon),
            r.evolution_mean_surprise >= floor,
            format!("{:.4} vs {:.4}", r.evolution_mean_surprise, floor),
        ));
        let ceiling = r.in_shell_bound + 3.0 * r.evolution_in_shell_se;
        out.push(Check::new(
            format!("T={}: evolution in-shell fraction <= bound + 3 SE", r.horizon),
            r.evolution_in_shell_rate <= ceiling,
            format!("{:.4} vs {:.4}", r.evolution_in_shell_rate, ceiling),
        ));
        if r.tc_exact.abs() < 1e-12 {
            out.push(Check::new(
                format!("T={}: zero-TC control gap within 3 SE of 0", r.horizon),
                r.evolution_gap.abs() <= 3.0 * r.evolution_surprise_se,
                format!("gap {:.4}, se {:.4}", r.evolution_gap, r.evolution_surprise_se),
            ));
        }
    }
    out
}

pub fn shell_experiment(cfg: &ShellExperimentConfig) -> Result<ShellReport, TheoryError> {
    cfg.validate()?;
    let mut horizons = cfg.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    let rows = horizons.iter().map(|&t| run_horizon(cfg, t)).collect::<Result<Vec<_>, _>>()?;
    let checks = checks(&rows);
    Ok(ShellReport { rows, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut cfg = ShellExperimentConfig::preset(ShellPreset::Iid);
        cfg.k_blocks = 1;
        assert!(cfg.validate().is_err());
        cfg.k_blocks = 2;
        cfg.epsilon = Some(0.0);
        assert!(cfg.validate().is_err());
        cfg.epsilon = None;
        cfg.horizons = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn small_run_is_seeded() {
        let mut cfg = ShellExperimentConfig::preset(ShellPreset::Correlated);
        cfg.n_samples = 5000;
        cfg.horizons = vec![8, 16];
        let a = shell_experiment(&cfg).unwrap();
        let b = shell_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
        assert!(a.rows[0].tc_exact > 0.0);
    }
}
