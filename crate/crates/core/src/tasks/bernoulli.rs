//! Independent Bernoulli sub-goals.
//!
//! A trajectory has one step per sub-goal attempt; each fresh attempt at
//! sub-goal `i` succeeds with probability `p_i`, independently. Terminal
//! success requires every sub-goal to be satisfied by some step.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DecomposeError, Enumerable, PolicyError, Task, VerifyError};
use crate::goal::{Goal, GoalSpec};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Attempt {
    pub goal: usize,
    pub success: bool,
}

impl fmt::Display for Attempt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.success { "ok" } else { "miss" };
        write!(f, "c{}:{mark}", self.goal + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BernoulliCheck {
    /// Every sub-goal satisfied (binary).
    All,
    /// Fraction of the listed sub-goals satisfied.
    Covers(Vec<usize>),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BernoulliError {
    #[error("need at least one sub-goal")]
    Empty,
    #[error("probability {0} for sub-goal {1} outside (0, 1]")]
    BadProbability(f64, usize),
}

#[derive(Debug, Clone)]
pub struct BernoulliTask {
    p: Vec<f64>,
}

impl BernoulliTask {
    pub fn new(p: Vec<f64>) -> Result<Self, BernoulliError> {
        if p.is_empty() {
            return Err(BernoulliError::Empty);
        }
        for (i, &pi) in p.iter().enumerate() {
            if !(pi > 0.0 && pi <= 1.0) {
                return Err(BernoulliError::BadProbability(pi, i));
            }
        }
        Ok(Self { p })
    }

    pub fn uniform(m: usize, p: f64) -> Result<Self, BernoulliError> {
        Self::new(vec![p; m])
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// `C_i(n)` for every sub-goal.
    pub fn satisfied(&self, steps: &[Attempt]) -> Vec<bool> {
        let mut sat = vec![false; self.m()];
        for a in steps {
            if a.success && a.goal < sat.len() {
                sat[a.goal] = true;
            }
        }
        sat
    }

    fn next_goal(&self, prefix: &[Attempt]) -> usize {
        let mut seen = vec![false; self.m()];
        for a in prefix {
            if a.goal < seen.len() {
                seen[a.goal] = true;
            }
        }
        seen.iter().position(|s| !s).unwrap_or(0)
    }
}

fn chunks(goals: &[usize]) -> Vec<Vec<usize>> {
    let parts = goals.len().min(4);
    let base = goals.len() / parts;
    let extra = goals.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut at = 0;
    for k in 0..parts {
        let len = base + usize::from(k < extra);
        out.push(goals[at..at + len].to_vec());
        at += len;
    }
    out
}

fn label(goals: &[usize]) -> String {
    let names: Vec<String> = goals.iter().map(|g| format!("c{}", g + 1)).collect();
    format!("satisfy {}", names.join(", "))
}

impl Task for BernoulliTask {
    type Step = Attempt;
    type Check = BernoulliCheck;

    fn name(&self) -> &'static str {
        "bernoulli"
    }

    fn next_step(&self, prefix: &[Attempt], rng: &mut dyn RngCore) -> Result<Attempt, PolicyError> {
        let goal = self.next_goal(prefix);
        Ok(Attempt { goal, success: rng.gen_bool(self.p[goal]) })
    }

    fn is_terminal(&self, steps: &[Attempt]) -> bool {
        steps.len() >= self.m()
    }

    fn root_goal(&self) -> GoalSpec<BernoulliCheck> {
        GoalSpec::new("satisfy every sub-goal", BernoulliCheck::All)
    }

    fn verify(&self, check: &BernoulliCheck, t: &Trajectory<Attempt>) -> Result<f64, VerifyError> {
        let sat = self.satisfied(&t.steps);
        match check {
            BernoulliCheck::All => Ok(if sat.iter().all(|&s| s) { 1.0 } else { 0.0 }),
            BernoulliCheck::Covers(goals) => {
                if goals.is_empty() {
                    return Err(VerifyError("empty sub-goal set".into()));
                }
                let mut hit = 0;
                for &g in goals {
                    if *sat.get(g).ok_or_else(|| VerifyError(format!("no sub-goal {g}")))? {
                        hit += 1;
                    }
                }
                Ok(hit as f64 / goals.len() as f64)
            }
        }
    }

    /// Splits a sub-goal set into up to four near-equal chunks.
    fn decompose(&self, leaf: &Goal<BernoulliCheck>, _rng: &mut dyn RngCore) -> Result<Vec<GoalSpec<BernoulliCheck>>, DecomposeError> {
        let goals: Vec<usize> = match &leaf.check {
            BernoulliCheck::All => (0..self.m()).collect(),
            BernoulliCheck::Covers(g) => g.clone(),
        };
        if goals.len() < 2 {
            return Err(DecomposeError::AtomicGoal);
        }
        Ok(chunks(&goals).into_iter().map(|c| GoalSpec::new(label(&c), BernoulliCheck::Covers(c))).collect())
    }
}

impl Enumerable for BernoulliTask {
    fn candidate_steps(&self, prefix: &[Attempt]) -> Vec<Attempt> {
        let goal = self.next_goal(prefix);
        vec![Attempt { goal, success: true }, Attempt { goal, success: false }]
    }
}
