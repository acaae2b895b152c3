use bes::engine::{reconcile, terminal_rank, EventKind};
use bes::tasks::arithmetic::ArithmeticTask;
use bes::tasks::bernoulli::BernoulliTask;
use bes::tasks::markov::MarkovTask;
use bes::{run, EngineConfig, OperatorProbs, RunResult, ScoringMode, SearchMode, StopReason, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_run<T: Task>(task: &T, cfg: &EngineConfig) -> RunResult<T::Step, T::Check> {
    let r = run(task, cfg).unwrap();
    assert!(r.policy_calls <= cfg.budget, "{} > {}", r.policy_calls, cfg.budget);
    assert_eq!(reconcile(&r.trace), Ok(r.policy_calls));
    let last = r.trace.last().unwrap();
    assert_eq!(last.kind, EventKind::Terminal);
    assert_eq!(last.policy_calls_cumulative, r.policy_calls);

    let created = r.trace.iter().filter(|e| e.kind == EventKind::Forward && e.child_id.is_some()).count();
    assert_eq!(created + 1, r.pool.len());
    assert!(r.pool.iter().all(|e| e.score_version == r.tree.version()));
    assert!(r.pool.degrees_consistent());
    assert!(r.tree.is_well_formed());

    let best = r.pool.get(r.best.id);
    if r.best.terminal {
        for e in r.pool.iter().filter(|e| e.is_terminal()) {
            assert!(terminal_rank(best, e).is_le(), "entry {} outranks the returned best", e.id.0);
        }
    }
    r
}

#[test]
fn forced_policy_exits_on_first_perfect_terminal() {
    let task = ArithmeticTask::parse("(4+6)*3-5", 1.0).unwrap();
    let r = check_run(&task, &EngineConfig { budget: 10, ..Default::default() });
    assert_eq!(r.stop, StopReason::PerfectTerminal);
    assert_eq!(r.best.value, Some(1.0));
    assert!(r.policy_calls <= 10);
    assert_eq!(r.best_trajectory().steps.last().unwrap().to_string(), "### answer = 25");
}

#[test]
fn zero_budget_returns_the_root_flagged() {
    let task = ArithmeticTask::parse("2+3", 0.6).unwrap();
    let r = check_run(&task, &EngineConfig { budget: 0, ..Default::default() });
    assert_eq!(r.pool.len(), 1);
    assert!(r.no_terminal_found());
    assert_eq!(r.policy_calls, 0);
    assert_eq!(r.stop, StopReason::BudgetExhausted);
}

#[test]
fn identical_inputs_give_identical_traces() {
    let task = ArithmeticTask::random(3, 0.6, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    for scoring in [ScoringMode::Recursive, ScoringMode::BucketInterpolation] {
        let cfg = EngineConfig { budget: 150, rng_seed: 5, scoring_mode: scoring, ..Default::default() };
        let a = serde_json::to_string(&run(&task, &cfg).unwrap().trace).unwrap();
        let b = serde_json::to_string(&run(&task, &cfg).unwrap().trace).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&run(&task, &EngineConfig { rng_seed: 6, ..cfg }).unwrap().trace).unwrap();
        assert_ne!(a, c);
    }
}

#[test]
fn random_configs_respect_the_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..40 {
        let cfg = EngineConfig {
            budget: rng.gen_range(0..120),
            k_max: rng.gen_range(1..6),
            k_dec: rng.gen_range(1..15),
            rng_seed: rng.gen(),
            mode: if rng.gen_bool(0.5) { SearchMode::Inference } else { SearchMode::GroupCollect },
            group_target: rng.gen_range(1..6),
            scoring_mode: if rng.gen_bool(0.5) { ScoringMode::Recursive } else { ScoringMode::BucketInterpolation },
            ..Default::default()
        };
        match i % 3 {
            0 => {
                let task = ArithmeticTask::random(rng.gen_range(1..4), 0.6, &mut rng).unwrap();
                check_run(&task, &cfg);
            }
            1 => {
                check_run(&BernoulliTask::uniform(rng.gen_range(2..7), 0.5).unwrap(), &cfg);
            }
            _ => {
                check_run(&MarkovTask::two_state(0.9, rng.gen_range(4..12), 2).unwrap(), &cfg);
            }
        }
    }
}

#[test]
fn group_collect_returns_a_full_group() {
    let task = BernoulliTask::uniform(4, 0.5).unwrap();
    let cfg = EngineConfig { budget: 80, mode: SearchMode::GroupCollect, group_target: 6, ..Default::default() };
    let r = check_run(&task, &cfg);
    let group = r.group.expect("group in collect mode");
    assert_eq!(group.members.len(), 6);
    assert!(group.members.iter().all(|t| t.len() <= cfg.rollout_max_steps));
    let pads = r.trace.iter().filter(|e| e.kind == EventKind::PadRollout).count();
    assert_eq!(pads, group.pad_calls.len());
}

#[test]
fn expansion_only_never_splices() {
    let task = ArithmeticTask::random(3, 0.6, &mut ChaCha8Rng::seed_from_u64(13)).unwrap();
    let cfg = EngineConfig { operator_probs: OperatorProbs::expansion_only(), budget: 100, ..Default::default() };
    let r = check_run(&task, &cfg);
    assert!(r.pool.iter().skip(1).all(|e| e.operator_tag == bes::OperatorTag::Expand));
}
