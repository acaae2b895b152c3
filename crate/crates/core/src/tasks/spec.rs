use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::arithmetic::{ArithmeticError, ArithmeticTask};
use super::bernoulli::{BernoulliError, BernoulliTask};
use super::circles::{CircleConfig, CircleError, CirclePackingTask};
use super::markov::{even_boundaries, MarkovError, MarkovTask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArithmeticSpec {
    /// Fixed expression; when absent one is generated from `expression_seed`.
    pub expression: Option<String>,
    pub depth: usize,
    pub expression_seed: u64,
    /// Per-line correctness probability of the policy.
    pub q: f64,
}

impl Default for ArithmeticSpec {
    fn default() -> Self {
        Self { expression: None, depth: 3, expression_seed: 0, q: 0.6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BernoulliSpec {
    pub m: usize,
    pub p: f64,
    /// Per-sub-goal probabilities; overrides `m` and `p`.
    pub probabilities: Option<Vec<f64>>,
}

impl Default for BernoulliSpec {
    fn default() -> Self {
        Self { m: 4, p: 0.5, probabilities: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkovSpec {
    pub horizon: usize,
    pub blocks: usize,
    /// Staying probability of the symmetric two-state chain.
    pub stay: f64,
    /// Full transition matrix; overrides `stay`.
    pub transitions: Option<Vec<Vec<f64>>>,
    /// Initial law; uniform when absent.
    pub init: Option<Vec<f64>>,
    pub target: Option<Vec<usize>>,
}

impl Default for MarkovSpec {
    fn default() -> Self {
        Self { horizon: 16, blocks: 2, stay: 0.9, transitions: None, init: None, target: None }
    }
}

/// Task selection as it appears in a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    Arithmetic(ArithmeticSpec),
    Bernoulli(BernoulliSpec),
    Markov(MarkovSpec),
    Circles(CircleConfig),
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec::Arithmetic(ArithmeticSpec::default())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TaskBuildError {
    #[error("arithmetic task: {0}")]
    Arithmetic(#[from] ArithmeticError),
    #[error("bernoulli task: {0}")]
    Bernoulli(#[from] BernoulliError),
    #[error("markov task: {0}")]
    Markov(#[from] MarkovError),
    #[error("circle packing task: {0}")]
    Circles(#[from] CircleError),
}

/// A constructed task of any built-in kind.
#[derive(Debug, Clone)]
pub enum BuiltTask {
    Arithmetic(ArithmeticTask),
    Bernoulli(BernoulliTask),
    Markov(MarkovTask),
    Circles(CirclePackingTask),
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Arithmetic(_) => "arithmetic",
            TaskSpec::Bernoulli(_) => "bernoulli",
            TaskSpec::Markov(_) => "markov",
            TaskSpec::Circles(_) => "circles",
        }
    }

    /// The default spec for a task name.
    pub fn named(name: &str) -> Option<Self> {
        Some(match name {
            "arithmetic" => TaskSpec::Arithmetic(ArithmeticSpec::default()),
            "bernoulli" => TaskSpec::Bernoulli(BernoulliSpec::default()),
            "markov" => TaskSpec::Markov(MarkovSpec::default()),
            "circles" => TaskSpec::Circles(CircleConfig::default()),
            _ => return None,
        })
    }

    pub fn build(&self) -> Result<BuiltTask, TaskBuildError> {
        Ok(match self {
            TaskSpec::Arithmetic(s) => BuiltTask::Arithmetic(match &s.expression {
                Some(src) => ArithmeticTask::parse(src, s.q)?,
                None => ArithmeticTask::random(s.depth, s.q, &mut ChaCha8Rng::seed_from_u64(s.expression_seed))?,
            }),
            TaskSpec::Bernoulli(s) => BuiltTask::Bernoulli(match &s.probabilities {
                Some(p) => BernoulliTask::new(p.clone())?,
                None => BernoulliTask::uniform(s.m, s.p)?,
            }),
            TaskSpec::Markov(s) => {
                let transitions = s
                    .transitions
                    .clone()
                    .unwrap_or_else(|| vec![vec![s.stay, 1.0 - s.stay], vec![1.0 - s.stay, s.stay]]);
                let a = transitions.len();
                let init = s.init.clone().unwrap_or_else(|| vec![1.0 / a.max(1) as f64; a]);
                BuiltTask::Markov(MarkovTask::new(
                    init,
                    transitions,
                    s.horizon,
                    even_boundaries(s.horizon, s.blocks),
                    s.target.clone(),
                )?)
            }
            TaskSpec::Circles(c) => BuiltTask::Circles(CirclePackingTask::new(*c)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_from_toml_like_json() {
        let spec: TaskSpec = serde_json::from_str(r#"{"kind":"arithmetic","expression":"2+3","q":0.9}"#).unwrap();
        assert!(matches!(spec.build().unwrap(), BuiltTask::Arithmetic(t) if t.value() == 5));
        let spec: TaskSpec = serde_json::from_str(r#"{"kind":"circles","n_circles":3}"#).unwrap();
        assert!(matches!(spec.build().unwrap(), BuiltTask::Circles(_)));
        assert!(serde_json::from_str::<TaskSpec>(r#"{"kind":"bernoulli","bogus":1}"#).is_err());
    }

    #[test]
    fn every_default_builds() {
        for name in ["arithmetic", "bernoulli", "markov", "circles"] {
            let spec = TaskSpec::named(name).unwrap();
            assert_eq!(spec.kind(), name);
            spec.build().unwrap();
        }
        assert!(TaskSpec::named("nope").is_none());
    }

    #[test]
    fn build_errors_surface() {
        let spec = TaskSpec::Bernoulli(BernoulliSpec { p: 1.5, ..Default::default() });
        assert!(matches!(spec.build(), Err(TaskBuildError::Bernoulli(_))));
        let spec = TaskSpec::Arithmetic(ArithmeticSpec { expression: Some("1/0".into()), ..Default::default() });
        assert!(spec.build().is_err());
    }
}
