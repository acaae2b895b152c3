//! `run` and `replay`.

use std::path::Path;
use std::time::Instant;

use bes::engine::TraceEvent;
use bes::tasks::BuiltTask;
use bes::{Best, StopReason, Task};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::trace::{self, TraceHeader};
use crate::Exit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub task: String,
    pub config_hash: String,
    pub seed: u64,
    pub stop: StopReason,
    pub solved: bool,
    pub no_terminal_found: bool,
    pub best: Best,
    pub best_steps: Vec<String>,
    pub policy_calls: usize,
    pub verifier_calls: usize,
    pub forward_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
    pub wall_seconds: f64,
}

pub struct Outcome {
    pub summary: Summary,
    pub events: Vec<TraceEvent>,
}

fn execute<T: Task>(task: &T, cfg: &RunConfig) -> Result<Outcome, Exit> {
    let started = Instant::now();
    let result = bes::run(task, &cfg.engine).map_err(|e| Exit::config(e.to_string()))?;
    let summary = Summary {
        task: task.name().to_string(),
        config_hash: cfg.hash(),
        seed: cfg.engine.rng_seed,
        stop: result.stop,
        solved: result.solved(),
        no_terminal_found: result.no_terminal_found(),
        best: result.best,
        best_steps: result.best_trajectory().steps.iter().map(|s| s.to_string()).collect(),
        policy_calls: result.policy_calls,
        verifier_calls: result.verifier_calls,
        forward_steps: result.forward_steps,
        group_size: result.group.as_ref().map(|g| g.members.len()),
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(Outcome { summary, events: result.trace })
}

pub fn run_config(cfg: &RunConfig) -> Result<Outcome, Exit> {
    cfg.engine.validate().map_err(|e| Exit::config(e.to_string()))?;
    let task = cfg.task.build().map_err(|e| Exit::task(e.to_string()))?;
    match &task {
        BuiltTask::Arithmetic(t) => execute(t, cfg),
        BuiltTask::Bernoulli(t) => execute(t, cfg),
        BuiltTask::Markov(t) => execute(t, cfg),
        BuiltTask::Circles(t) => execute(t, cfg),
    }
}

pub fn cmd_run(cfg: &RunConfig, trace_path: Option<&Path>, summary_path: Option<&Path>) -> Result<(), Exit> {
    let outcome = run_config(cfg)?;
    if outcome.summary.no_terminal_found {
        log::warn!("no terminal trajectory found; reporting the best partial");
    }
    if let Some(path) = trace_path {
        let lines = trace::render(&TraceHeader::new(cfg), &outcome.events);
        trace::write(path, &lines).map_err(|e| Exit::io(format!("{}: {e}", path.display())))?;
    }
    let json = serde_json::to_string_pretty(&outcome.summary).expect("summary serializes");
    match summary_path {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| Exit::io(format!("{}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn differing_fields(a: &str, b: &str) -> Vec<String> {
    let (Ok(serde_json::Value::Object(a)), Ok(serde_json::Value::Object(b))) =
        (serde_json::from_str::<serde_json::Value>(a), serde_json::from_str::<serde_json::Value>(b))
    else {
        return Vec::new();
    };
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|k| a.get(*k) != b.get(*k)).cloned().collect()
}

/// Replays the run recorded in a trace and compares it event by event.
/// Returns the number of events checked.
pub fn cmd_replay(path: &Path) -> Result<usize, Exit> {
    let loaded = trace::read(path).map_err(Exit::config)?;
    let cfg = &loaded.header.config;
    if loaded.header.config_hash != cfg.hash() {
        return Err(Exit::diverged("header config_hash does not match the recorded config".into()));
    }
    if loaded.header.seed != cfg.engine.rng_seed {
        return Err(Exit::diverged("header seed does not match the recorded config".into()));
    }
    let outcome = run_config(cfg)?;
    let expected = trace::render(&loaded.header, &outcome.events);
    let expected = &expected[1..];
    let timed = cfg.engine.record_wall_time;
    for i in 0..expected.len().max(loaded.lines.len()) {
        let (want, got) = (expected.get(i), loaded.lines.get(i));
        let same = match (want, got) {
            (Some(_), Some(_)) if timed => outcome.events[i].without_wall_time() == loaded.events[i].without_wall_time(),
            (Some(w), Some(g)) => w == g,
            _ => false,
        };
        if !same {
            let step = outcome.events.get(i).or(loaded.events.get(i)).map(|e| e.step).unwrap_or(0);
            let detail = match (want, got) {
                (Some(w), Some(g)) => format!("fields {:?} differ", differing_fields(w, g)),
                (Some(_), None) => "trace ends early".to_string(),
                _ => "trace has extra events".to_string(),
            };
            return Err(Exit::diverged(format!("first divergence at event {i} (step {step}): {detail}")));
        }
    }
    Ok(expected.len())
}
