use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pool::OperatorTag;

#[derive(Debug, Error, PartialEq)]
#[error("invalid config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self { field, reason: reason.into() }
    }
}

/// Mixture over the five forward operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorProbs {
    pub expand: f64,
    pub combine: f64,
    pub delete: f64,
    pub translocate: f64,
    pub crossover: f64,
}

impl Default for OperatorProbs {
    fn default() -> Self {
        Self { expand: 0.70, combine: 0.10, delete: 0.05, translocate: 0.075, crossover: 0.075 }
    }
}

impl OperatorProbs {
    pub fn expansion_only() -> Self {
        Self { expand: 1.0, combine: 0.0, delete: 0.0, translocate: 0.0, crossover: 0.0 }
    }

    pub fn as_array(&self) -> [(OperatorTag, f64); 5] {
        [
            (OperatorTag::Expand, self.expand),
            (OperatorTag::Combine, self.combine),
            (OperatorTag::Delete, self.delete),
            (OperatorTag::Translocate, self.translocate),
            (OperatorTag::Crossover, self.crossover),
        ]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().map(|(_, p)| p).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    Recursive,
    BucketInterpolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Return on the first terminal child with a perfect root verifier.
    Inference,
    /// Collect unique terminals up to `group_target`, then pad the group.
    GroupCollect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecomposeTrigger {
    Interval,
    Stagnation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Maximum number of policy step-calls.
    pub budget: usize,
    /// Forward steps between decomposition checks.
    pub k_dec: usize,
    /// Upper end of the per-expansion step count.
    pub k_max: usize,
    /// Unexplored-node bonus.
    pub lambda: f64,
    pub tau_0: f64,
    pub tau_end: f64,
    /// Blend between a goal's own verifier and its children's mean.
    pub alpha: f64,
    pub operator_probs: OperatorProbs,
    pub group_target: usize,
    pub rng_seed: u64,
    pub scoring_mode: ScoringMode,
    pub bucket_precision: f64,
    pub mode: SearchMode,
    pub decompose_trigger: DecomposeTrigger,
    /// Consecutive non-improving checks before a stagnation-triggered decomposition.
    pub stagnation_window: usize,
    pub stagnation_margin: f64,
    /// Terminal entries may be spliced by two-parent operators (never expanded).
    pub allow_terminal_splice: bool,
    /// Leaves at this depth are not decomposed further.
    pub max_tree_depth: usize,
    /// Above this many eligible entries, pair selection subsamples.
    pub pair_enumeration_cap: usize,
    pub max_operator_resamples: usize,
    /// Step cap for the fresh rollouts that pad a training group.
    pub rollout_max_steps: usize,
    /// Hard stop on forward steps; `None` means `50 * (budget + 1)`.
    pub max_forward_steps: Option<usize>,
    /// Stamp trace events with wall-clock microseconds (breaks byte-identical replay).
    pub record_wall_time: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            budget: 200,
            k_dec: 10,
            k_max: 4,
            lambda: 0.1,
            tau_0: 2.0,
            tau_end: 1.0,
            alpha: 0.3,
            operator_probs: OperatorProbs::default(),
            group_target: 8,
            rng_seed: 0,
            scoring_mode: ScoringMode::Recursive,
            bucket_precision: 1e-2,
            mode: SearchMode::Inference,
            decompose_trigger: DecomposeTrigger::Interval,
            stagnation_window: 5,
            stagnation_margin: 1e-2,
            allow_terminal_splice: true,
            max_tree_depth: 6,
            pair_enumeration_cap: 512,
            max_operator_resamples: 3,
            rollout_max_steps: 64,
            max_forward_steps: None,
            record_wall_time: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k_dec == 0 {
            return Err(ConfigError::new("k_dec", "must be at least 1"));
        }
        if self.k_max == 0 {
            return Err(ConfigError::new("k_max", "must be at least 1"));
        }
        if !(self.tau_end > 0.0) || !self.tau_end.is_finite() {
            return Err(ConfigError::new("tau_end", "must be a positive finite number"));
        }
        if !(self.tau_0 >= self.tau_end) || !self.tau_0.is_finite() {
            return Err(ConfigError::new("tau_0", "must be finite and at least tau_end"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::new("alpha", "must lie in [0, 1]"));
        }
        if !self.lambda.is_finite() {
            return Err(ConfigError::new("lambda", "must be finite"));
        }
        for (tag, p) in self.operator_probs.as_array() {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::new("operator_probs", format!("{tag} probability {p} outside [0, 1]")));
            }
        }
        let sum = self.operator_probs.sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ConfigError::new("operator_probs", format!("probabilities sum to {sum}, expected 1")));
        }
        if !(self.bucket_precision > 0.0) || !self.bucket_precision.is_finite() {
            return Err(ConfigError::new("bucket_precision", "must be a positive finite number"));
        }
        if self.group_target == 0 {
            return Err(ConfigError::new("group_target", "must be at least 1"));
        }
        if self.stagnation_window == 0 {
            return Err(ConfigError::new("stagnation_window", "must be at least 1"));
        }
        if !(self.stagnation_margin >= 0.0) {
            return Err(ConfigError::new("stagnation_margin", "must be non-negative"));
        }
        if self.pair_enumeration_cap < 2 {
            return Err(ConfigError::new("pair_enumeration_cap", "must be at least 2"));
        }
        Ok(())
    }

    /// Number of forward steps the temperature is annealed over: the budget
    /// divided by the mean expansion cost, at least one.
    pub fn anneal_steps(&self) -> usize {
        let mean_cost = (self.k_max as f64 + 1.0) / 2.0;
        ((self.budget as f64 / mean_cost).floor() as usize).max(1)
    }

    pub fn forward_step_cap(&self) -> usize {
        self.max_forward_steps.unwrap_or(50 * (self.budget + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = EngineConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.operator_probs.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_fields() {
        let mut cfg = EngineConfig { alpha: 1.5, ..Default::default() };
        assert_eq!(cfg.validate().unwrap_err().field, "alpha");
        cfg.alpha = 0.3;
        cfg.tau_0 = 0.5;
        assert_eq!(cfg.validate().unwrap_err().field, "tau_0");
        cfg.tau_0 = 2.0;
        cfg.operator_probs.expand = 0.5;
        assert_eq!(cfg.validate().unwrap_err().field, "operator_probs");
    }

    #[test]
    fn anneal_steps_uses_mean_expansion_cost() {
        let cfg = EngineConfig { budget: 200, k_max: 4, ..Default::default() };
        assert_eq!(cfg.anneal_steps(), 80);
        let cfg = EngineConfig { budget: 0, ..Default::default() };
        assert_eq!(cfg.anneal_steps(), 1);
    }
}
