//! Run configuration: a TOML file with `[engine]` and `[task]` sections,
//! overridden by command-line flags.

use bes::tasks::TaskSpec;
use bes::{DecomposeTrigger, EngineConfig, ScoringMode, SearchMode};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub engine: EngineConfig,
    pub task: TaskSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Inference,
    GroupCollect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoringArg {
    Recursive,
    BucketInterpolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TriggerArg {
    Interval,
    Stagnation,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<String>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<ModeArg>,
    pub scoring: Option<ScoringArg>,
    pub decompose_trigger: Option<TriggerArg>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Applies flag overrides. Naming a different task kind replaces the
    /// `[task]` section with that task's defaults.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), String> {
        if let Some(name) = &o.task {
            if name != self.task.kind() {
                self.task = TaskSpec::named(name).ok_or_else(|| format!("unknown task `{name}`"))?;
            }
        }
        if let Some(b) = o.budget {
            self.engine.budget = b;
        }
        if let Some(s) = o.seed {
            self.engine.rng_seed = s;
        }
        if let Some(m) = o.mode {
            self.engine.mode = match m {
                ModeArg::Inference => SearchMode::Inference,
                ModeArg::GroupCollect => SearchMode::GroupCollect,
            };
        }
        if let Some(s) = o.scoring {
            self.engine.scoring_mode = match s {
                ScoringArg::Recursive => ScoringMode::Recursive,
                ScoringArg::BucketInterpolation => ScoringMode::BucketInterpolation,
            };
        }
        if let Some(t) = o.decompose_trigger {
            self.engine.decompose_trigger = match t {
                TriggerArg::Interval => DecomposeTrigger::Interval,
                TriggerArg::Stagnation => DecomposeTrigger::Stagnation,
            };
        }
        Ok(())
    }

    /// SHA-256 of the config's JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
