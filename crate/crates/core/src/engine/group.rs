use std::cmp::Ordering;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::pool::{CandidatePool, EntryId, PoolEntry};
use crate::tasks::{rollout, Policy};
use crate::trajectory::Trajectory;

/// Samples handed to a group-based trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingGroup<S> {
    pub members: Vec<Trajectory<S>>,
    /// Pool entries behind the leading members, in rank order.
    pub from_pool: Vec<EntryId>,
    /// Policy calls spent on each padding rollout, in order.
    pub pad_calls: Vec<usize>,
}

impl<S> TrainingGroup<S> {
    pub fn padded(&self) -> usize {
        self.pad_calls.len()
    }
}

/// Ordering used for every "best terminal" decision: higher terminal value,
/// then higher backward score, then the older entry.
pub fn terminal_rank<S>(a: &PoolEntry<S>, b: &PoolEntry<S>) -> Ordering {
    let va = a.terminal_value.unwrap_or(f64::NEG_INFINITY);
    let vb = b.terminal_value.unwrap_or(f64::NEG_INFINITY);
    vb.total_cmp(&va).then(b.backward.total_cmp(&a.backward)).then(a.id.cmp(&b.id))
}

/// Terminal entries with distinct step sequences, best first.
pub fn ranked_unique_terminals<S>(pool: &CandidatePool<S>) -> Vec<EntryId> {
    let mut entries: Vec<&PoolEntry<S>> =
        pool.iter().filter(|e| e.is_terminal() && e.duplicate_of.is_none()).collect();
    entries.sort_by(|a, b| terminal_rank(a, b));
    entries.into_iter().map(|e| e.id).collect()
}

/// Up to `group_size` unique terminals from the pool, padded with fresh
/// rollouts to exactly `group_size`. Padding draws from `budget`; once it is
/// spent the remaining rollouts come back truncated (possibly empty).
pub fn extract_training_group<S, P>(
    pool: &CandidatePool<S>,
    group_size: usize,
    policy: &P,
    budget: &mut Budget,
    rollout_max_steps: usize,
    rng: &mut dyn RngCore,
) -> TrainingGroup<S>
where
    S: Clone,
    P: Policy<S> + ?Sized,
{
    let from_pool: Vec<EntryId> = ranked_unique_terminals(pool).into_iter().take(group_size).collect();
    let mut members: Vec<Trajectory<S>> = from_pool.iter().map(|&id| pool.get(id).trajectory.clone()).collect();
    let mut pad_calls = Vec::new();
    while members.len() < group_size {
        let (t, calls) = rollout(policy, rollout_max_steps, budget.remaining(), rng);
        budget.charge(calls);
        pad_calls.push(calls);
        members.push(t);
    }
    TrainingGroup { members, from_pool, pad_calls }
}
