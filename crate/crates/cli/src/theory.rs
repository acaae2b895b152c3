//! `theory shell` and `theory subgoals`.

use std::path::{Path, PathBuf};

use bes::tasks::{BuiltTask, MarkovSpec, TaskSpec};
use bes::theorylab::{
    shell_experiment, subgoal_experiment, Check, ShellExperimentConfig, ShellPreset, SubgoalExperimentConfig,
    SubgoalReport,
};
use serde::{Deserialize, Serialize};

use crate::Exit;

/// Shell experiment settings as read from a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShellFile {
    pub preset: Option<ShellPreset>,
    /// Custom chain; overrides `preset`.
    pub chain: Option<MarkovSpec>,
    pub epsilon: Option<f64>,
    pub k_blocks: Option<usize>,
    pub n_samples: Option<usize>,
    pub horizons: Option<Vec<usize>>,
    pub seed: Option<u64>,
}

impl ShellFile {
    pub fn into_config(self) -> Result<ShellExperimentConfig, Exit> {
        let mut cfg = ShellExperimentConfig::preset(self.preset.unwrap_or(ShellPreset::Correlated));
        if let Some(chain) = self.chain {
            match TaskSpec::Markov(chain).build().map_err(|e| Exit::config(e.to_string()))? {
                BuiltTask::Markov(t) => cfg.task = t,
                _ => unreachable!("markov spec builds a markov task"),
            }
        }
        cfg.epsilon = self.epsilon.or(cfg.epsilon);
        cfg.k_blocks = self.k_blocks.unwrap_or(cfg.k_blocks);
        cfg.n_samples = self.n_samples.unwrap_or(cfg.n_samples);
        cfg.horizons = self.horizons.unwrap_or(cfg.horizons);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.validate().map_err(|e| Exit::config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Sub-goal experiment settings; `m` may list several values to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubgoalFile {
    pub m: Vec<usize>,
    pub p: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SubgoalFile {
    fn default() -> Self {
        let d = SubgoalExperimentConfig::default();
        Self { m: vec![d.m], p: d.p, delta: d.delta, trials: d.trials, seed: d.seed }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgoalSweep {
    pub runs: Vec<SubgoalReport>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Serialize)]
struct SubgoalRow {
    m: usize,
    p: f64,
    delta: f64,
    trials: usize,
    n_term_mean: f64,
    n_term_se: f64,
    n_bidir_quantile: f64,
    n_bidir_mean: f64,
    n_bidir_se: f64,
    ratio: f64,
    n_term_expected: f64,
    n_bidir_bound: f64,
}

pub fn load_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Exit> {
    let text = std::fs::read_to_string(path).map_err(|e| Exit::config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Exit::config(format!("{}: {e}", path.display())))
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}

fn write_report<R: Serialize>(out: &Path, report: &R) -> Result<PathBuf, Exit> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(out, json + "\n").map_err(|e| Exit::io(format!("{}: {e}", out.display())))?;
    Ok(out.with_extension("csv"))
}

fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), Exit> {
    let io = |e: csv::Error| Exit::io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Exit::io(format!("{}: {e}", path.display())))
}

pub fn cmd_shell(cfg: &ShellExperimentConfig, out: &Path) -> Result<bool, Exit> {
    let report = shell_experiment(cfg).map_err(|e| Exit::config(e.to_string()))?;
    let csv_path = write_report(out, &report)?;
    write_csv(&csv_path, &report.rows)?;
    print_checks(&report.checks);
    Ok(report.all_passed())
}

pub fn cmd_subgoals(file: &SubgoalFile, out: &Path) -> Result<bool, Exit> {
    if file.m.is_empty() {
        return Err(Exit::config("no sub-goal count given".into()));
    }
    let mut runs = Vec::new();
    for &m in &file.m {
        let cfg = SubgoalExperimentConfig { m, p: file.p, delta: file.delta, trials: file.trials, seed: file.seed };
        runs.push(subgoal_experiment(&cfg).map_err(|e| Exit::config(e.to_string()))?);
    }
    let mut checks: Vec<Check> = Vec::new();
    for r in &runs {
        checks.extend(r.checks.iter().map(|c| Check { name: format!("m={}: {}", r.m, c.name), ..c.clone() }));
    }
    if runs.len() > 1 {
        let mut by_m: Vec<&SubgoalReport> = runs.iter().collect();
        by_m.sort_by_key(|r| r.m);
        let ratios: Vec<f64> = by_m.iter().map(|r| r.ratio).collect();
        checks.push(Check {
            name: "ratio increases with m".into(),
            passed: ratios.windows(2).all(|w| w[1] > w[0]),
            detail: format!("{ratios:?}"),
        });
    }
    let rows: Vec<SubgoalRow> = runs
        .iter()
        .map(|r| SubgoalRow {
            m: r.m,
            p: r.p,
            delta: r.delta,
            trials: r.trials,
            n_term_mean: r.n_term_mean,
            n_term_se: r.n_term_se,
            n_bidir_quantile: r.n_bidir_quantile,
            n_bidir_mean: r.n_bidir_mean,
            n_bidir_se: r.n_bidir_se,
            ratio: r.ratio,
            n_term_expected: r.n_term_expected,
            n_bidir_bound: r.n_bidir_bound,
        })
        .collect();
    let sweep = SubgoalSweep { runs, checks };
    let csv_path = write_report(out, &sweep)?;
    write_csv(&csv_path, &rows)?;
    print_checks(&sweep.checks);
    Ok(sweep.checks.iter().all(|c| c.passed))
}
