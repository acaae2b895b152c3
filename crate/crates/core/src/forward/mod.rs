//! Forward search: expansion, the four evolution operators, and Boltzmann
//! parent selection.

mod operators;
mod selection;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use operators::{
    combine, crossover, crossover_at, delete, delete_at, translocate, translocate_at, OperatorError,
};
pub use selection::{
    anneal_tau, boltzmann_probabilities, bonus_score, candidate_pairs, sample_index, select_parent_pair,
    select_single_parent, single_parent_probabilities, Candidate, SelectionError,
};

use crate::budget::Budget;
use crate::pool::{EntryId, OperatorTag};
use crate::tasks::{Policy, PolicyError};
use crate::trajectory::Trajectory;

/// The sampled indices behind one operator application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum Draws {
    Expand { k: usize },
    Combine,
    Delete { ell: usize },
    Translocate { r: usize, q: usize },
    Crossover { i: usize, j: usize },
}

/// One resolved forward operator application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorChoice {
    pub kind: OperatorTag,
    pub parents: Vec<EntryId>,
    pub draws: Draws,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion<S> {
    pub trajectory: Trajectory<S>,
    /// The sampled step count `K`.
    pub k: usize,
    /// Policy calls actually made; fewer than `k` on early termination or budget exhaustion.
    pub calls: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpandError {
    #[error("terminal trajectories cannot be expanded")]
    ParentTerminal,
    #[error("{error} after {calls} policy calls")]
    PolicyFailure { calls: usize, error: PolicyError },
}

/// Samples `K ~ Uniform{1..k_max}` and appends up to `K` policy steps,
/// stopping early on a terminal step or when the budget runs out. Each step
/// drawn (including a failed one) costs one call.
pub fn expand<S, P, R>(
    parent: &Trajectory<S>,
    policy: &P,
    k_max: usize,
    budget: &mut Budget,
    rng: &mut R,
) -> Result<Expansion<S>, ExpandError>
where
    S: Clone,
    P: Policy<S> + ?Sized,
    R: RngCore,
{
    if parent.terminal {
        return Err(ExpandError::ParentTerminal);
    }
    let k = rng.gen_range(1..=k_max.max(1));
    let mut steps = parent.steps.clone();
    let mut calls = 0;
    let mut terminal = false;
    for _ in 0..k {
        if !budget.try_consume() {
            break;
        }
        calls += 1;
        match policy.next_step(&steps, rng) {
            Ok(step) => steps.push(step),
            Err(error) => return Err(ExpandError::PolicyFailure { calls, error }),
        }
        if policy.is_terminal(&steps) {
            terminal = true;
            break;
        }
    }
    Ok(Expansion { trajectory: Trajectory::new(steps, terminal), k, calls })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Emits `s{n+1}` for a prefix of length `n`, or `ANS` when asked to finish.
    struct Counter {
        finish_after: Option<usize>,
        fail_at: Option<usize>,
    }

    impl Policy<String> for Counter {
        fn next_step(&self, prefix: &[String], _rng: &mut dyn RngCore) -> Result<String, PolicyError> {
            if Some(prefix.len()) == self.fail_at {
                return Err(PolicyError("boom".into()));
            }
            if Some(prefix.len()) == self.finish_after {
                return Ok("ANS".into());
            }
            Ok(format!("s{}", prefix.len() + 1))
        }

        fn is_terminal(&self, steps: &[String]) -> bool {
            steps.last().is_some_and(|s| s == "ANS")
        }
    }

    fn traj(xs: &[&str]) -> Trajectory<String> {
        Trajectory::new(xs.iter().map(|s| s.to_string()).collect(), false)
    }

    #[test]
    fn deterministic_policy_fills_k_steps() {
        let policy = Counter { finish_after: None, fail_at: None };
        let mut budget = Budget::new(10);
        // k_max = 1 forces K = 1; run twice to get two steps
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e1 = expand(&Trajectory::root(), &policy, 1, &mut budget, &mut rng).unwrap();
        let e2 = expand(&e1.trajectory, &policy, 1, &mut budget, &mut rng).unwrap();
        assert_eq!(e2.trajectory, traj(&["s1", "s2"]));
        assert_eq!(budget.used(), 2);
    }

    #[test]
    fn terminal_step_stops_expansion() {
        let policy = Counter { finish_after: Some(1), fail_at: None };
        let mut budget = Budget::new(10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = expand(&traj(&["s1"]), &policy, 1, &mut budget, &mut rng).unwrap();
        assert_eq!(e.trajectory.steps, vec!["s1".to_string(), "ANS".to_string()]);
        assert!(e.trajectory.terminal);
        let again = expand(&e.trajectory, &policy, 3, &mut budget, &mut rng);
        assert_eq!(again, Err(ExpandError::ParentTerminal));
    }

    #[test]
    fn seeded_length_matches_replayed_draw() {
        let policy = Counter { finish_after: None, fail_at: None };
        for seed in 0..30 {
            let mut budget = Budget::new(100);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = expand(&traj(&["s1"]), &policy, 3, &mut budget, &mut rng).unwrap();
            let mut replay = ChaCha8Rng::seed_from_u64(seed);
            let k: usize = replay.gen_range(1..=3);
            assert_eq!(e.k, k);
            assert_eq!(e.trajectory.len(), 1 + k);
            assert_eq!(budget.used(), k);
        }
    }

    #[test]
    fn budget_caps_calls() {
        let policy = Counter { finish_after: None, fail_at: None };
        let mut budget = Budget::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        loop {
            let e = expand(&Trajectory::root(), &policy, 8, &mut budget, &mut rng).unwrap();
            if e.k > 2 {
                assert_eq!(e.calls, 2);
                break;
            }
            budget = Budget::new(2);
        }
        assert!(budget.is_exhausted());
    }

    #[test]
    fn policy_failure_still_costs_calls() {
        let policy = Counter { finish_after: None, fail_at: Some(0) };
        let mut budget = Budget::new(5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = expand(&Trajectory::root(), &policy, 3, &mut budget, &mut rng).unwrap_err();
        assert!(matches!(err, ExpandError::PolicyFailure { calls: 1, .. }));
        assert_eq!(budget.used(), 1);
    }
}
