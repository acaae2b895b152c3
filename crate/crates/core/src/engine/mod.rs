//! The bidirectional search loop.
//!
//! One [`run`] owns a pool, a goal tree, a verifier memo and a single seeded
//! random stream. Each forward step draws an operator kind, selects parents
//! by Boltzmann sampling, inserts the child and scores it; every `k_dec`
//! steps (or on stagnation) the goal tree is refined and the whole pool is
//! re-scored before the next forward step.

mod effective;
mod group;
mod trace;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use effective::{bucket_index, effective_score, BUCKET_GUARD};
pub use group::{extract_training_group, ranked_unique_terminals, terminal_rank, TrainingGroup};
pub use trace::{reconcile, EventKind, TraceEvent, TRACE_SCHEMA_VERSION};

use crate::backward::{decompose_step, DecomposeOutcome, VerifierMemo};
use crate::budget::Budget;
use crate::config::{ConfigError, DecomposeTrigger, EngineConfig, OperatorProbs, ScoringMode, SearchMode};
use crate::forward::{
    anneal_tau, combine, crossover, delete, expand, sample_index, select_parent_pair, select_single_parent,
    Candidate, Draws, ExpandError,
};
use crate::goal::GoalTree;
use crate::pool::{CandidatePool, EntryId, EntryScores, OperatorTag};
use crate::tasks::Task;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// A new terminal child scored 1 on the root verifier.
    PerfectTerminal,
    /// `group_target` unique terminals were collected.
    GroupComplete,
    BudgetExhausted,
    /// The forward-step safety cap was reached with budget left.
    StepCap,
}

/// The returned entry. `terminal == false` means no terminal trajectory was
/// found and this is the best-scored partial instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Best {
    pub id: EntryId,
    pub terminal: bool,
    pub value: Option<f64>,
    pub score: f64,
    pub backward: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult<S, C> {
    pub best: Best,
    pub stop: StopReason,
    pub pool: CandidatePool<S>,
    pub tree: GoalTree<C>,
    pub trace: Vec<TraceEvent>,
    pub policy_calls: usize,
    pub verifier_calls: usize,
    pub forward_steps: usize,
    /// Present in group-collect mode.
    pub group: Option<TrainingGroup<S>>,
}

impl<S, C> RunResult<S, C> {
    pub fn no_terminal_found(&self) -> bool {
        !self.best.terminal
    }

    pub fn solved(&self) -> bool {
        self.best.value.is_some_and(|v| v >= 1.0)
    }

    pub fn best_trajectory(&self) -> &Trajectory<S> {
        &self.pool.get(self.best.id).trajectory
    }
}

/// Draws an operator kind from the configured mixture.
pub fn draw_operator<R: rand::Rng + ?Sized>(probs: &OperatorProbs, rng: &mut R) -> OperatorTag {
    let table = probs.as_array();
    let weights: Vec<f64> = table.iter().map(|(_, p)| *p).collect();
    table[sample_index(&weights, rng)].0
}

/// Runs the search to completion.
pub fn run<T: Task>(task: &T, config: &EngineConfig) -> Result<RunResult<T::Step, T::Check>, ConfigError> {
    config.validate()?;
    let mut engine = Engine::new(task, config);
    let stop = engine.search();
    Ok(engine.finish(stop))
}

enum Attempt<S> {
    Child { trajectory: Trajectory<S>, parents: Vec<EntryId>, tag: OperatorTag, draws: Draws, calls: usize },
    /// The operator could not apply; draw another kind.
    Degenerate(String),
    /// The step ends without a child.
    NoOp { tag: OperatorTag, parents: Vec<EntryId>, draws: Option<Draws>, calls: usize, reason: String },
}

struct Engine<'t, T: Task> {
    task: &'t T,
    cfg: &'t EngineConfig,
    pool: CandidatePool<T::Step>,
    tree: GoalTree<T::Check>,
    memo: VerifierMemo,
    raw: Vec<f64>,
    budget: Budget,
    rng: ChaCha8Rng,
    trace: Vec<TraceEvent>,
    forward_steps: usize,
    anneal_steps: usize,
    best_raw: f64,
    raw_at_check: f64,
    stagnant_checks: usize,
    unique_terminals: usize,
    clock: Option<Instant>,
}

impl<'t, T: Task> Engine<'t, T> {
    fn new(task: &'t T, cfg: &'t EngineConfig) -> Self {
        let mut engine = Self {
            task,
            cfg,
            pool: CandidatePool::new(),
            tree: GoalTree::new(task.root_goal()),
            memo: VerifierMemo::new(),
            raw: Vec::new(),
            budget: Budget::new(cfg.budget),
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            trace: Vec::new(),
            forward_steps: 0,
            anneal_steps: cfg.anneal_steps(),
            best_raw: f64::NEG_INFINITY,
            raw_at_check: f64::NEG_INFINITY,
            stagnant_checks: 0,
            unique_terminals: 0,
            clock: cfg.record_wall_time.then(Instant::now),
        };
        let root = task.label(Vec::new());
        engine.insert(root, Vec::new(), OperatorTag::Root);
        engine.raw_at_check = engine.best_raw;
        engine
    }

    fn event(&self, kind: EventKind) -> TraceEvent {
        let mut e = TraceEvent::new(self.forward_steps, kind);
        e.policy_calls_cumulative = self.budget.used();
        e.verifier_calls_cumulative = self.memo.calls();
        e.tree_version = self.tree.version();
        e.wall_micros = self.clock.map(|c| c.elapsed().as_micros() as u64);
        e
    }

    fn emit(&mut self, mut e: TraceEvent) {
        let failures = self.memo.take_failures();
        if !failures.is_empty() {
            let text: Vec<String> =
                failures.iter().map(|(id, f)| format!("{id} {}: {}", f.goal, f.message)).collect();
            log::warn!("verifier failures at step {}: {}", e.step, text.join("; "));
            let msg = format!("verifier failures: {}", text.join("; "));
            e.note = Some(match e.note.take() {
                Some(n) => format!("{n}; {msg}"),
                None => msg,
            });
        }
        log::debug!("{:?} step {} child {:?} score {:?}", e.kind, e.step, e.child_id, e.child_score);
        self.trace.push(e);
    }

    fn scores_for(&mut self, id: EntryId) -> EntryScores {
        let root = self.tree.root_id();
        let backward = self.memo.backward(&self.pool, id, root, &self.tree, self.cfg.alpha, self.task);
        let terminal_value = if self.pool.get(id).is_terminal() {
            Some(self.memo.value(&self.pool, id, root, &self.tree.root().check, self.task))
        } else {
            None
        };
        let score = match self.cfg.scoring_mode {
            ScoringMode::Recursive => backward,
            ScoringMode::BucketInterpolation => effective_score(self.raw[id.0], backward, self.cfg.bucket_precision),
        };
        EntryScores { score, backward, terminal_value, version: self.tree.version() }
    }

    fn insert(&mut self, trajectory: Trajectory<T::Step>, parents: Vec<EntryId>, tag: OperatorTag) -> EntryId {
        let raw = self.task.raw_objective(&trajectory);
        let placeholder = EntryScores { score: 0.0, backward: 0.0, terminal_value: None, version: self.tree.version() };
        let id = self.pool.insert(trajectory, parents, self.forward_steps, tag, placeholder);
        self.raw.push(raw);
        self.best_raw = self.best_raw.max(raw);
        let scores = self.scores_for(id);
        self.pool.set_scores(id, scores);
        let e = self.pool.get(id);
        if e.is_terminal() && e.duplicate_of.is_none() {
            self.unique_terminals += 1;
        }
        id
    }

    fn search(&mut self) -> StopReason {
        self.decompose();
        let cap = self.cfg.forward_step_cap();
        loop {
            if self.budget.is_exhausted() {
                return StopReason::BudgetExhausted;
            }
            if self.forward_steps >= cap {
                log::warn!("forward step cap {cap} reached with {} calls left", self.budget.remaining());
                return StopReason::StepCap;
            }
            if let Some(child) = self.forward_step() {
                let e = self.pool.get(child);
                match self.cfg.mode {
                    SearchMode::Inference if e.terminal_value.is_some_and(|v| v >= 1.0) => {
                        return StopReason::PerfectTerminal;
                    }
                    SearchMode::GroupCollect if self.unique_terminals >= self.cfg.group_target => {
                        return StopReason::GroupComplete;
                    }
                    _ => {}
                }
            }
            if self.forward_steps % self.cfg.k_dec == 0 {
                match self.cfg.decompose_trigger {
                    DecomposeTrigger::Interval => self.decompose(),
                    DecomposeTrigger::Stagnation => self.stagnation_check(),
                }
            }
        }
    }

    fn stagnation_check(&mut self) {
        if self.best_raw >= self.raw_at_check + self.cfg.stagnation_margin {
            self.raw_at_check = self.best_raw;
            self.stagnant_checks = 0;
        } else {
            self.stagnant_checks += 1;
        }
        if self.stagnant_checks >= self.cfg.stagnation_window {
            self.stagnant_checks = 0;
            self.decompose();
        }
    }

    fn decompose(&mut self) {
        let Engine { tree, memo, pool, task, rng, cfg, .. } = self;
        let outcome = decompose_step(
            tree,
            |g| (0..pool.len()).any(|i| memo.value(pool, EntryId(i), g.id, &g.check, *task) >= 1.0),
            *task,
            cfg.max_tree_depth,
            rng,
        );
        if let DecomposeOutcome::Failed { .. } = outcome {
            log::info!("decomposition failed: {}", outcome.describe());
        }
        let mut e = self.event(EventKind::Decompose);
        e.note = Some(outcome.describe());
        self.emit(e);
        if outcome.changed_tree() {
            self.rescore();
        }
    }

    fn rescore(&mut self) {
        for i in 0..self.pool.len() {
            let scores = self.scores_for(EntryId(i));
            self.pool.set_scores(EntryId(i), scores);
        }
        let e = self.event(EventKind::Rescore);
        self.emit(e);
    }

    /// One forward step. Returns the inserted child, if any.
    fn forward_step(&mut self) -> Option<EntryId> {
        let tau = anneal_tau(self.forward_steps, self.anneal_steps, self.cfg.tau_0, self.cfg.tau_end);
        self.forward_steps += 1;
        let mut kind = draw_operator(&self.cfg.operator_probs, &mut self.rng);
        let mut rejected: Vec<String> = Vec::new();
        let attempt = loop {
            let attempt = match kind {
                OperatorTag::Expand | OperatorTag::Root => self.try_expand(tau),
                OperatorTag::Delete => self.try_delete(tau),
                _ => self.try_pair(kind, tau),
            };
            match attempt {
                Attempt::Degenerate(reason) => {
                    rejected.push(format!("{kind}: {reason}"));
                    kind = if rejected.len() > self.cfg.max_operator_resamples {
                        OperatorTag::Expand
                    } else {
                        draw_operator(&self.cfg.operator_probs, &mut self.rng)
                    };
                }
                other => break other,
            }
        };
        let resampled = (!rejected.is_empty()).then(|| format!("resampled after {}", rejected.join(", ")));
        match attempt {
            Attempt::Child { trajectory, parents, tag, draws, calls } => {
                let id = self.insert(trajectory, parents.clone(), tag);
                let mut e = self.event(EventKind::Forward);
                e.operator_tag = Some(tag);
                e.parent_ids = parents;
                e.child_id = Some(id);
                e.child_score = Some(self.pool.get(id).score);
                e.tau = Some(tau);
                e.policy_calls = calls;
                e.draws = Some(draws);
                e.note = resampled;
                self.emit(e);
                Some(id)
            }
            Attempt::NoOp { tag, parents, draws, calls, reason } => {
                let mut e = self.event(EventKind::Forward);
                e.operator_tag = Some(tag);
                e.parent_ids = parents;
                e.tau = Some(tau);
                e.policy_calls = calls;
                e.draws = draws;
                e.note = Some(match resampled {
                    Some(r) => format!("{r}; no child: {reason}"),
                    None => format!("no child: {reason}"),
                });
                self.emit(e);
                None
            }
            Attempt::Degenerate(_) => unreachable!("degenerate attempts are resampled"),
        }
    }

    fn candidates(&self, include_terminal: bool) -> Vec<Candidate> {
        self.pool.iter().filter(|e| include_terminal || !e.is_terminal()).map(Candidate::from).collect()
    }

    fn pick_single(&mut self, tau: f64) -> Result<EntryId, String> {
        let eligible = self.candidates(false);
        select_single_parent(&eligible, tau, self.cfg.lambda, &mut self.rng)
            .map(|i| eligible[i].id)
            .map_err(|e| e.to_string())
    }

    fn try_expand(&mut self, tau: f64) -> Attempt<T::Step> {
        let parent = match self.pick_single(tau) {
            Ok(p) => p,
            Err(reason) => {
                return Attempt::NoOp { tag: OperatorTag::Expand, parents: vec![], draws: None, calls: 0, reason }
            }
        };
        let result =
            expand(&self.pool.get(parent).trajectory, self.task, self.cfg.k_max, &mut self.budget, &mut self.rng);
        match result {
            Ok(x) => {
                // the policy's terminal flag and the task's agree; relabel to be safe
                let trajectory = self.task.label(x.trajectory.steps);
                Attempt::Child {
                    trajectory,
                    parents: vec![parent],
                    tag: OperatorTag::Expand,
                    draws: Draws::Expand { k: x.k },
                    calls: x.calls,
                }
            }
            Err(ExpandError::PolicyFailure { calls, error }) => Attempt::NoOp {
                tag: OperatorTag::Expand,
                parents: vec![parent],
                draws: None,
                calls,
                reason: error.to_string(),
            },
            Err(e @ ExpandError::ParentTerminal) => Attempt::NoOp {
                tag: OperatorTag::Expand,
                parents: vec![parent],
                draws: None,
                calls: 0,
                reason: e.to_string(),
            },
        }
    }

    fn try_delete(&mut self, tau: f64) -> Attempt<T::Step> {
        let parent = match self.pick_single(tau) {
            Ok(p) => p,
            Err(reason) => return Attempt::Degenerate(reason),
        };
        match delete(&self.pool.get(parent).trajectory.steps, &mut self.rng) {
            Ok((steps, ell)) => Attempt::Child {
                trajectory: self.task.label(steps),
                parents: vec![parent],
                tag: OperatorTag::Delete,
                draws: Draws::Delete { ell },
                calls: 0,
            },
            Err(e) => Attempt::Degenerate(e.to_string()),
        }
    }

    fn try_pair(&mut self, kind: OperatorTag, tau: f64) -> Attempt<T::Step> {
        let eligible = self.candidates(self.cfg.allow_terminal_splice);
        let Engine { memo, pool, tree, task, rng, cfg, raw, .. } = self;
        let root = tree.root_id();
        let picked = select_parent_pair(
            &eligible,
            |a, b| {
                let backward = memo.pair(pool, a.id, b.id, root, tree, cfg.alpha, *task);
                match cfg.scoring_mode {
                    ScoringMode::Recursive => backward,
                    ScoringMode::BucketInterpolation => {
                        effective_score(raw[a.id.0].max(raw[b.id.0]), backward, cfg.bucket_precision)
                    }
                }
            },
            tau,
            cfg.pair_enumeration_cap,
            rng,
        );
        let (i, j) = match picked {
            Ok(p) => p,
            Err(e) => return Attempt::Degenerate(e.to_string()),
        };
        let (ida, idb) = (eligible[i].id, eligible[j].id);
        let a = &pool.get(ida).trajectory.steps;
        let b = &pool.get(idb).trajectory.steps;
        let result = match kind {
            OperatorTag::Combine => Ok((combine(a, b), Draws::Combine)),
            OperatorTag::Translocate => {
                crate::forward::translocate(a, b, rng).map(|(v, r, q)| (v, Draws::Translocate { r, q }))
            }
            OperatorTag::Crossover => crossover(a, b, rng).map(|(v, i, j)| (v, Draws::Crossover { i, j })),
            other => unreachable!("{other} is not a two-parent operator"),
        };
        match result {
            Ok((steps, draws)) => Attempt::Child {
                trajectory: task.label(steps),
                parents: vec![ida, idb],
                tag: kind,
                draws,
                calls: 0,
            },
            Err(e) => Attempt::Degenerate(e.to_string()),
        }
    }

    fn best(&self) -> Best {
        let terminal = self.pool.iter().filter(|e| e.is_terminal()).min_by(|a, b| terminal_rank(a, b));
        let entry = match terminal {
            Some(e) => e,
            None => self
                .pool
                .iter()
                .min_by(|a, b| b.score.total_cmp(&a.score).then(b.backward.total_cmp(&a.backward)).then(a.id.cmp(&b.id)))
                .expect("pool always holds the root"),
        };
        Best {
            id: entry.id,
            terminal: entry.is_terminal(),
            value: entry.terminal_value,
            score: entry.score,
            backward: entry.backward,
        }
    }

    fn finish(mut self, stop: StopReason) -> RunResult<T::Step, T::Check> {
        let group = match self.cfg.mode {
            SearchMode::GroupCollect => {
                let group = extract_training_group(
                    &self.pool,
                    self.cfg.group_target,
                    self.task,
                    &mut self.budget,
                    self.cfg.rollout_max_steps,
                    &mut self.rng,
                );
                // padding events replay the cumulative count one rollout at a time
                let mut cumulative = self.budget.used() - group.pad_calls.iter().sum::<usize>();
                for &calls in &group.pad_calls {
                    cumulative += calls;
                    let mut e = self.event(EventKind::PadRollout);
                    e.policy_calls = calls;
                    e.policy_calls_cumulative = cumulative;
                    self.emit(e);
                }
                Some(group)
            }
            SearchMode::Inference => None,
        };
        let best = self.best();
        if !best.terminal {
            log::info!("no terminal trajectory found; returning best partial {}", best.id);
        }
        let mut e = self.event(EventKind::Terminal);
        e.child_id = Some(best.id);
        e.child_score = Some(best.score);
        e.note = Some(format!("{stop:?}"));
        self.emit(e);
        RunResult {
            best,
            stop,
            pool: self.pool,
            tree: self.tree,
            trace: self.trace,
            policy_calls: self.budget.used(),
            verifier_calls: self.memo.calls(),
            forward_steps: self.forward_steps,
            group,
        }
    }
}
