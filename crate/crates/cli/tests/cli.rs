use std::path::Path;
use std::process::{Command, Output};

fn bes(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bes")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json_lines(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = bes(dir.path(), &["run", "--task", "arithmetic", "--budget", "200", "--seed", "7", "--trace", "out.jsonl"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let lines = json_lines(&dir.path().join("out.jsonl"));
    let header = &lines[0];
    assert_eq!(header["schema_version"], 1);
    assert_eq!(header["seed"], 7);
    assert_eq!(header["config_hash"].as_str().unwrap().len(), 64);
    let last = lines.last().unwrap();
    assert_eq!(last["kind"], "terminal");
    assert_eq!(summary["policy_calls"], last["policy_calls_cumulative"]);
    assert!(summary["policy_calls"].as_u64().unwrap() <= 200);
    let steps: Vec<u64> = lines[1..].iter().map(|e| e["step"].as_u64().unwrap()).collect();
    assert!(steps.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn zero_budget_reports_no_calls() {
    let dir = tempfile::tempdir().unwrap();
    let o = bes(dir.path(), &["run", "--budget", "0", "--summary", "s.json"]);
    assert_eq!(code(&o), 0);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(s["policy_calls"], 0);
    assert_eq!(s["no_terminal_found"], true);
}

#[test]
fn same_seed_gives_identical_trace_and_replay_passes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.jsonl", "b.jsonl"] {
        assert_eq!(code(&bes(dir.path(), &["run", "--task", "bernoulli", "--seed", "3", "--trace", name])), 0);
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.jsonl")).unwrap());
    let o = bes(dir.path(), &["replay", "a.jsonl"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn replay_reports_a_mutated_field_and_rejects_truncation() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bes(dir.path(), &["run", "--seed", "9", "--trace", "t.jsonl"])), 0);
    let text = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let target = lines.len() / 2;
    let mut event: serde_json::Value = serde_json::from_str(&lines[target]).unwrap();
    event["tree_version"] = serde_json::json!(event["tree_version"].as_u64().unwrap() + 100);
    let step = event["step"].as_u64().unwrap();
    lines[target] = serde_json::to_string(&event).unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), lines.join("\n") + "\n").unwrap();
    let o = bes(dir.path(), &["replay", "bad.jsonl"]);
    assert_eq!(code(&o), 4);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(&format!("event {} (step {step})", target - 1)) && err.contains("tree_version"), "{err}");

    std::fs::write(dir.path().join("cut.jsonl"), &text[..text.len() / 2]).unwrap();
    assert_eq!(code(&bes(dir.path(), &["replay", "cut.jsonl"])), 2);
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[engine]\nbudget = 30\nk_dec = 5\n\n[task]\nkind = \"markov\"\nhorizon = 8\n",
    )
    .unwrap();
    let o = bes(dir.path(), &["run", "--config", "c.toml", "--budget", "12", "--scoring", "bucket-interpolation", "--trace", "t.jsonl"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let header = &json_lines(&dir.path().join("t.jsonl"))[0];
    assert_eq!(header["config"]["engine"]["budget"], 12);
    assert_eq!(header["config"]["engine"]["k_dec"], 5);
    assert_eq!(header["config"]["engine"]["scoring_mode"], "bucket_interpolation");
    assert_eq!(header["config"]["task"]["kind"], "markov");
}

#[test]
fn bad_config_exits_2_and_bad_task_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("typo.toml"), "[engine]\nbudget = 5\nalhpa = 0.2\n").unwrap();
    let o = bes(dir.path(), &["run", "--config", "typo.toml"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("alhpa"), "{err}");

    std::fs::write(dir.path().join("tau.toml"), "[engine]\ntau_0 = -1.0\n").unwrap();
    assert_eq!(code(&bes(dir.path(), &["run", "--config", "tau.toml"])), 2);

    std::fs::write(dir.path().join("task.toml"), "[task]\nkind = \"bernoulli\"\np = 1.5\n").unwrap();
    assert_eq!(code(&bes(dir.path(), &["run", "--config", "task.toml"])), 3);
    assert_eq!(code(&bes(dir.path(), &["run", "--task", "chess"])), 2);
}

#[test]
fn theory_subcommands_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = bes(dir.path(), &["theory", "subgoals", "--m", "4", "--p", "0.5", "--delta", "0.1", "--trials", "10000"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("subgoals_report.json")).unwrap()).unwrap();
    assert!(report["runs"][0]["ratio"].as_f64().unwrap() > 2.0);
    let csv = std::fs::read_to_string(dir.path().join("subgoals_report.csv")).unwrap();
    assert!(csv.starts_with("m,p,delta,trials,"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));

    assert_eq!(code(&bes(dir.path(), &["theory", "subgoals", "--p", "1.5"])), 2);

    let o = bes(dir.path(), &["theory", "shell", "--preset", "iid", "--samples", "20000", "--out", "iid.json"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("zero-TC control") && !out.contains("FAIL"), "{out}");
    let rows = std::fs::read_to_string(dir.path().join("iid.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4);
}
