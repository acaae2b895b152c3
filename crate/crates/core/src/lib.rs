//! Bidirectional evolutionary search over step sequences.
//!
//! A forward pool of partial trajectories grows by policy expansion and by
//! four splice operators (combine, delete, translocate, crossover), with
//! parents chosen by annealed Boltzmann sampling. A backward goal tree is
//! refined periodically and scores every trajectory by how many sub-goals it
//! already satisfies. [`engine::run`] drives both; [`tasks`] holds the
//! pluggable interfaces and four built-in tasks; [`theorylab`] measures the
//! entropy-shell and sub-goal-collection effects on small exact models.

pub mod backward;
pub mod budget;
pub mod config;
pub mod engine;
pub mod forward;
pub mod goal;
pub mod pool;
pub mod theorylab;
pub mod tasks;
pub mod trajectory;

pub use budget::Budget;
pub use config::{ConfigError, DecomposeTrigger, EngineConfig, OperatorProbs, ScoringMode, SearchMode};
pub use engine::{run, Best, RunResult, StopReason};
pub use goal::{Goal, GoalId, GoalSpec, GoalTree};
pub use pool::{CandidatePool, EntryId, OperatorTag, PoolEntry};
pub use tasks::Task;
pub use trajectory::Trajectory;
