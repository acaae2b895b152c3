//! Pluggable policy, verifier and decomposer interfaces, plus the built-in
//! deterministic tasks.
//!
//! A [`Task`] bundles all three roles. The narrower [`Policy`],
//! [`CheckRegistry`] and [`Decomposer`] traits are what the forward operators
//! and backward scoring actually consume; every `Task` implements them.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use rand::RngCore;
use thiserror::Error;

use crate::goal::{Goal, GoalSpec};
use crate::trajectory::Trajectory;

pub mod arithmetic;
pub mod bernoulli;
mod brute_force;
pub mod circles;
pub mod markov;
mod spec;

pub use brute_force::{brute_force_best, BruteForceBest, BruteForceError};
pub use spec::{ArithmeticSpec, BernoulliSpec, BuiltTask, MarkovSpec, TaskBuildError, TaskSpec};

#[derive(Debug, Clone, Error, PartialEq)]
#[error("policy failed: {0}")]
pub struct PolicyError(pub String);

#[derive(Debug, Clone, Error, PartialEq)]
#[error("verifier failed: {0}")]
pub struct VerifyError(pub String);

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DecomposeError {
    /// The goal cannot be split any further.
    #[error("goal is atomic")]
    AtomicGoal,
    #[error("decomposition failed: {0}")]
    Failed(String),
}

/// A problem instance with its step policy, verifiers and decomposer.
pub trait Task {
    type Step: Clone + Eq + Hash + Debug + Display + Send + Sync;
    /// Handle naming one registered verifier.
    type Check: Clone + Debug + Send + Sync;

    fn name(&self) -> &'static str;

    /// Samples the next step given the prefix. Must be a pure function of
    /// `(prefix, rng state)`.
    fn next_step(&self, prefix: &[Self::Step], rng: &mut dyn RngCore) -> Result<Self::Step, PolicyError>;

    fn is_terminal(&self, steps: &[Self::Step]) -> bool;

    /// The problem's terminal verifier, as a goal.
    fn root_goal(&self) -> GoalSpec<Self::Check>;

    /// Evaluates one verifier; values lie in `[0, 1]`.
    fn verify(&self, check: &Self::Check, trajectory: &Trajectory<Self::Step>) -> Result<f64, VerifyError>;

    /// Proposes 2 to 4 strict sub-goals of `leaf`.
    fn decompose(&self, leaf: &Goal<Self::Check>, rng: &mut dyn RngCore) -> Result<Vec<GoalSpec<Self::Check>>, DecomposeError>;

    /// Task-native objective used by bucket-interpolation scoring and the
    /// stagnation trigger. Defaults to the root verifier.
    fn raw_objective(&self, trajectory: &Trajectory<Self::Step>) -> f64 {
        self.verify(&self.root_goal().check, trajectory).unwrap_or(0.0)
    }

    fn label(&self, steps: Vec<Self::Step>) -> Trajectory<Self::Step> {
        let terminal = self.is_terminal(&steps);
        Trajectory::new(steps, terminal)
    }
}

/// Tasks whose step space at every prefix is small and finite.
pub trait Enumerable: Task {
    fn candidate_steps(&self, prefix: &[Self::Step]) -> Vec<Self::Step>;
}

pub trait Policy<S> {
    fn next_step(&self, prefix: &[S], rng: &mut dyn RngCore) -> Result<S, PolicyError>;
    fn is_terminal(&self, steps: &[S]) -> bool;
}

pub trait CheckRegistry<S, C> {
    fn evaluate(&self, check: &C, trajectory: &Trajectory<S>) -> Result<f64, VerifyError>;
}

pub trait Decomposer<C> {
    fn decompose(&self, leaf: &Goal<C>, rng: &mut dyn RngCore) -> Result<Vec<GoalSpec<C>>, DecomposeError>;
}

impl<T: Task> Policy<T::Step> for T {
    fn next_step(&self, prefix: &[T::Step], rng: &mut dyn RngCore) -> Result<T::Step, PolicyError> {
        Task::next_step(self, prefix, rng)
    }

    fn is_terminal(&self, steps: &[T::Step]) -> bool {
        Task::is_terminal(self, steps)
    }
}

impl<T: Task> CheckRegistry<T::Step, T::Check> for T {
    fn evaluate(&self, check: &T::Check, trajectory: &Trajectory<T::Step>) -> Result<f64, VerifyError> {
        self.verify(check, trajectory)
    }
}

impl<T: Task> Decomposer<T::Check> for T {
    fn decompose(&self, leaf: &Goal<T::Check>, rng: &mut dyn RngCore) -> Result<Vec<GoalSpec<T::Check>>, DecomposeError> {
        Task::decompose(self, leaf, rng)
    }
}

/// Draws a fresh rollout from the empty prefix until the policy marks it
/// terminal, the step cap is hit, or `calls_left` runs out. Returns the
/// trajectory and the number of policy calls spent.
pub fn rollout<S, P: Policy<S> + ?Sized>(
    policy: &P,
    max_steps: usize,
    calls_left: usize,
    rng: &mut dyn RngCore,
) -> (Trajectory<S>, usize) {
    let mut steps = Vec::new();
    let mut calls = 0;
    while calls < calls_left && steps.len() < max_steps && !policy.is_terminal(&steps) {
        calls += 1;
        match policy.next_step(&steps, rng) {
            Ok(step) => steps.push(step),
            Err(_) => break,
        }
    }
    let terminal = policy.is_terminal(&steps);
    (Trajectory::new(steps, terminal), calls)
}
