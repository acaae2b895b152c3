use rand::{Rng, RngCore};

use crate::goal::{Goal, GoalId, GoalTree};
use crate::tasks::{CheckRegistry, DecomposeError, Decomposer};
use crate::trajectory::Trajectory;

/// What a decomposition pass did to the tree.
#[derive(Debug, Clone, PartialEq)]
pub enum DecomposeOutcome {
    /// Every leaf is fully satisfied by some pool entry.
    AllSolved,
    /// Unsolved leaves exist but all sit at the depth cap or are atomic.
    Exhausted { unsolved: usize },
    /// The sampled leaf cannot be split; it is marked and skipped from now on.
    Atomic { leaf: GoalId },
    Failed { leaf: GoalId, reason: String },
    Decomposed { leaf: GoalId, children: Vec<GoalId> },
}

impl DecomposeOutcome {
    pub fn changed_tree(&self) -> bool {
        matches!(self, DecomposeOutcome::Decomposed { .. })
    }

    pub fn describe(&self) -> String {
        match self {
            DecomposeOutcome::AllSolved => "all leaves solved".into(),
            DecomposeOutcome::Exhausted { unsolved } => {
                format!("{unsolved} unsolved leaves, none decomposable")
            }
            DecomposeOutcome::Atomic { leaf } => format!("{leaf} is atomic"),
            DecomposeOutcome::Failed { leaf, reason } => format!("{leaf}: {reason}"),
            DecomposeOutcome::Decomposed { leaf, children } => {
                let ids: Vec<String> = children.iter().map(|c| c.to_string()).collect();
                format!("{leaf} -> [{}]", ids.join(", "))
            }
        }
    }
}

/// One backward refinement: collect unsolved leaves, sample one uniformly
/// among those still decomposable, and attach the decomposer's children.
///
/// `is_solved(leaf)` must report whether some pool entry fully satisfies it.
pub fn decompose_step<C, D, F>(
    tree: &mut GoalTree<C>,
    mut is_solved: F,
    decomposer: &D,
    max_depth: usize,
    rng: &mut dyn RngCore,
) -> DecomposeOutcome
where
    D: Decomposer<C> + ?Sized,
    F: FnMut(&Goal<C>) -> bool,
{
    let unsolved: Vec<GoalId> = tree.leaves().filter(|g| !is_solved(g)).map(|g| g.id).collect();
    if unsolved.is_empty() {
        return DecomposeOutcome::AllSolved;
    }
    let open: Vec<GoalId> = unsolved
        .iter()
        .copied()
        .filter(|&id| {
            let g = tree.get(id);
            !g.atomic && g.depth < max_depth
        })
        .collect();
    if open.is_empty() {
        return DecomposeOutcome::Exhausted { unsolved: unsolved.len() };
    }
    let leaf = open[rng.gen_range(0..open.len())];
    match decomposer.decompose(tree.get(leaf), rng) {
        Ok(children) if (2..=4).contains(&children.len()) => {
            let children = tree.attach_children(leaf, children);
            DecomposeOutcome::Decomposed { leaf, children }
        }
        Ok(children) => DecomposeOutcome::Failed {
            leaf,
            reason: format!("decomposer returned {} children, expected 2 to 4", children.len()),
        },
        Err(DecomposeError::AtomicGoal) => {
            tree.mark_atomic(leaf);
            DecomposeOutcome::Atomic { leaf }
        }
        Err(e) => DecomposeOutcome::Failed { leaf, reason: e.to_string() },
    }
}

/// [`decompose_step`] with leaf satisfaction computed directly over a set of
/// trajectories (no memo).
pub fn decompose_against<S, C, R, D>(
    tree: &mut GoalTree<C>,
    pool: &[Trajectory<S>],
    registry: &R,
    decomposer: &D,
    max_depth: usize,
    rng: &mut dyn RngCore,
) -> DecomposeOutcome
where
    R: CheckRegistry<S, C> + ?Sized,
    D: Decomposer<C> + ?Sized,
{
    decompose_step(
        tree,
        |g| pool.iter().any(|t| registry.evaluate(&g.check, t).map(|v| v >= 1.0).unwrap_or(false)),
        decomposer,
        max_depth,
        rng,
    )
}
