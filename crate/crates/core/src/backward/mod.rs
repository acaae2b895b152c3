//! Backward search: recursive goal-tree scoring and periodic decomposition.

mod decompose;
mod scoring;

pub use decompose::{decompose_against, decompose_step, DecomposeOutcome};
pub use scoring::{backward_score, pair_score, recursive_score, ScoreReport, VerifierFailure, VerifierMemo};
