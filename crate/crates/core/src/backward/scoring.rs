use crate::goal::{GoalId, GoalTree};
use crate::pool::{CandidatePool, EntryId};
use crate::tasks::{CheckRegistry, VerifyError};
use crate::trajectory::Trajectory;

/// A verifier that errored or returned a value outside `[0, 1]`. The goal is
/// scored 0.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifierFailure {
    pub goal: GoalId,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub score: f64,
    pub verifier_calls: usize,
    pub failures: Vec<VerifierFailure>,
}

/// Recursive blend over the goal tree.
///
/// `value(g)` supplies the goal's verifier value (or the pairwise max). A
/// goal with value 1 short-circuits to 1 and its subtree is never visited;
/// leaves score their value; inner goals score
/// `alpha * value + (1 - alpha) * mean(child scores)`. Under ordered
/// children, a child contributes 0 unevaluated unless every earlier sibling
/// scored 1.
pub fn recursive_score<C>(
    tree: &GoalTree<C>,
    goal: GoalId,
    alpha: f64,
    value: &mut dyn FnMut(GoalId) -> f64,
) -> f64 {
    let v = value(goal);
    if v >= 1.0 {
        return 1.0;
    }
    let g = tree.get(goal);
    if g.is_leaf() {
        return v;
    }
    let mut sum = 0.0;
    let mut gate_open = true;
    for &child in &g.children {
        if !gate_open {
            continue;
        }
        let s = recursive_score(tree, child, alpha, value);
        if g.ordered_children && s < 1.0 {
            gate_open = false;
        }
        sum += s;
    }
    alpha * v + (1.0 - alpha) * (sum / g.children.len() as f64)
}

fn checked(goal: GoalId, result: Result<f64, VerifyError>) -> Result<f64, VerifierFailure> {
    match result {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        Ok(v) => Err(VerifierFailure { goal, message: format!("value {v} outside [0, 1]") }),
        Err(e) => Err(VerifierFailure { goal, message: e.to_string() }),
    }
}

/// Backward score of one trajectory against `goal`.
pub fn backward_score<S, C, R>(
    trajectory: &Trajectory<S>,
    goal: GoalId,
    tree: &GoalTree<C>,
    alpha: f64,
    registry: &R,
) -> ScoreReport
where
    R: CheckRegistry<S, C> + ?Sized,
{
    let mut calls = 0;
    let mut failures = Vec::new();
    let score = recursive_score(tree, goal, alpha, &mut |g| {
        calls += 1;
        checked(g, registry.evaluate(&tree.get(g).check, trajectory)).unwrap_or_else(|f| {
            failures.push(f);
            0.0
        })
    });
    ScoreReport { score, verifier_calls: calls, failures }
}

/// Joint-coverage score of a pair: the same recursion with each verifier
/// replaced by the max over both trajectories.
pub fn pair_score<S, C, R>(
    a: &Trajectory<S>,
    b: &Trajectory<S>,
    goal: GoalId,
    tree: &GoalTree<C>,
    alpha: f64,
    registry: &R,
) -> ScoreReport
where
    R: CheckRegistry<S, C> + ?Sized,
{
    let mut calls = 0;
    let mut failures = Vec::new();
    let score = recursive_score(tree, goal, alpha, &mut |g| {
        let check = &tree.get(g).check;
        let mut eval = |t: &Trajectory<S>| {
            calls += 1;
            checked(g, registry.evaluate(check, t)).unwrap_or_else(|f| {
                failures.push(f);
                0.0
            })
        };
        let va = eval(a);
        let vb = eval(b);
        va.max(vb)
    });
    ScoreReport { score, verifier_calls: calls, failures }
}

/// Memo of verifier values per `(pool entry, goal)`.
///
/// Goals are never removed or edited and verifiers are pure, so a cached
/// value stays valid across tree versions; new goals simply start empty.
#[derive(Debug, Clone, Default)]
pub struct VerifierMemo {
    table: Vec<Vec<Option<f64>>>,
    calls: usize,
    failures: Vec<(EntryId, VerifierFailure)>,
}

impl VerifierMemo {
    pub fn new() -> Self {
        Self::default()
    }

    /// Uncached verifier evaluations performed so far.
    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Drains failures recorded since the last call.
    pub fn take_failures(&mut self) -> Vec<(EntryId, VerifierFailure)> {
        std::mem::take(&mut self.failures)
    }

    pub fn value<S, C, R>(
        &mut self,
        pool: &CandidatePool<S>,
        entry: EntryId,
        goal: GoalId,
        check: &C,
        registry: &R,
    ) -> f64
    where
        R: CheckRegistry<S, C> + ?Sized,
    {
        if self.table.len() <= entry.0 {
            self.table.resize_with(entry.0 + 1, Vec::new);
        }
        let row = &mut self.table[entry.0];
        if row.len() <= goal.0 {
            row.resize(goal.0 + 1, None);
        }
        if let Some(v) = row[goal.0] {
            return v;
        }
        self.calls += 1;
        let result = registry.evaluate(check, &pool.get(entry).trajectory);
        let v = checked(goal, result).unwrap_or_else(|f| {
            self.failures.push((entry, f));
            0.0
        });
        self.table[entry.0][goal.0] = Some(v);
        v
    }

    pub fn backward<S, C, R>(
        &mut self,
        pool: &CandidatePool<S>,
        entry: EntryId,
        goal: GoalId,
        tree: &GoalTree<C>,
        alpha: f64,
        registry: &R,
    ) -> f64
    where
        R: CheckRegistry<S, C> + ?Sized,
    {
        recursive_score(tree, goal, alpha, &mut |g| self.value(pool, entry, g, &tree.get(g).check, registry))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn pair<S, C, R>(
        &mut self,
        pool: &CandidatePool<S>,
        a: EntryId,
        b: EntryId,
        goal: GoalId,
        tree: &GoalTree<C>,
        alpha: f64,
        registry: &R,
    ) -> f64
    where
        R: CheckRegistry<S, C> + ?Sized,
    {
        recursive_score(tree, goal, alpha, &mut |g| {
            let check = &tree.get(g).check;
            let va = self.value(pool, a, g, check, registry);
            let vb = self.value(pool, b, g, check, registry);
            va.max(vb)
        })
    }
}
