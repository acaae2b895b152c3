use thiserror::Error;

use super::Enumerable;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteForceError {
    #[error("enumeration exceeded {cap} nodes")]
    SpaceTooLarge { cap: usize },
    #[error("no terminal trajectory within {max_len} steps")]
    NoTerminal { max_len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceBest<S> {
    pub trajectory: Trajectory<S>,
    pub score: f64,
    /// Prefixes visited, the root included.
    pub nodes: usize,
}

/// Exhaustive depth-first enumeration of every step sequence up to
/// `max_len`, returning the terminal one the root verifier likes best
/// (first in enumeration order on ties).
pub fn brute_force_best<T: Enumerable + ?Sized>(
    task: &T,
    max_len: usize,
    node_cap: usize,
) -> Result<BruteForceBest<T::Step>, BruteForceError> {
    let root = task.root_goal().check;
    let mut best: Option<(Vec<T::Step>, f64)> = None;
    let mut nodes = 0;
    let mut stack: Vec<Vec<T::Step>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        nodes += 1;
        if nodes > node_cap {
            return Err(BruteForceError::SpaceTooLarge { cap: node_cap });
        }
        if task.is_terminal(&prefix) {
            let t = Trajectory::new(prefix, true);
            let v = task.verify(&root, &t).unwrap_or(0.0);
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((t.steps, v));
            }
            continue;
        }
        if prefix.len() >= max_len {
            continue;
        }
        // reversed so the first candidate is explored first
        for step in task.candidate_steps(&prefix).into_iter().rev() {
            let mut next = prefix.clone();
            next.push(step);
            stack.push(next);
        }
    }
    let (steps, score) = best.ok_or(BruteForceError::NoTerminal { max_len })?;
    Ok(BruteForceBest { trajectory: Trajectory::new(steps, true), score, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::arithmetic::{ArithStep, ArithmeticTask};
    use crate::tasks::bernoulli::BernoulliTask;
    use crate::tasks::markov::MarkovTask;

    #[test]
    fn single_operator_expression() {
        let task = ArithmeticTask::parse("2+3", 0.6).unwrap();
        let best = brute_force_best(&task, 2, 10_000).unwrap();
        assert_eq!(best.score, 1.0);
        assert_eq!(best.trajectory.steps.last(), Some(&ArithStep::Answer(5)));
        assert_eq!(best.trajectory.steps.last().unwrap().to_string(), "### answer = 5");
    }

    #[test]
    fn worked_expression_answers_ten() {
        let task = ArithmeticTask::parse("((4+6)*3)/2-5", 0.6).unwrap();
        let best = brute_force_best(&task, 5, 100_000).unwrap();
        assert_eq!(best.score, 1.0);
        assert_eq!(best.trajectory.steps.last(), Some(&ArithStep::Answer(10)));
    }

    #[test]
    fn bernoulli_all_ones() {
        let task = BernoulliTask::uniform(3, 0.5).unwrap();
        let best = brute_force_best(&task, 3, 1000).unwrap();
        assert_eq!(best.score, 1.0);
        assert!(best.trajectory.steps.iter().all(|a| a.success));
        assert_eq!(best.nodes, 15);
    }

    #[test]
    fn tiny_markov_and_cap() {
        let task = MarkovTask::two_state(0.9, 4, 2).unwrap();
        let best = brute_force_best(&task, 4, 1000).unwrap();
        assert_eq!(best.trajectory.steps, vec![0, 0, 0, 0]);
        assert_eq!(brute_force_best(&task, 4, 10), Err(BruteForceError::SpaceTooLarge { cap: 10 }));
        assert_eq!(brute_force_best(&task, 2, 1000), Err(BruteForceError::NoTerminal { max_len: 2 }));
    }
}
