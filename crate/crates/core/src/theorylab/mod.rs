//! Desk-scale experiments on small exact models.
//!
//! [`entropy`] computes trajectory entropy and block total correlation of an
//! order-1 chain exactly. [`shell`] compares how far expansion rollouts and
//! block-spliced candidates land from the entropy shell. [`subgoal`] counts
//! fresh candidates needed to satisfy `m` sub-goals jointly versus
//! separately.
//!
//! Monte Carlo work is split into fixed-size chunks, each with its own
//! ChaCha stream of the master seed, so totals do not depend on the number
//! of worker threads.

pub mod entropy;
pub mod shell;
pub mod subgoal;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use entropy::{
    block_total_correlation_enumerated, enumerated_entropy, exact_block_total_correlation, exact_trajectory_entropy, marginal,
    per_step_entropy, shannon,
};
pub use shell::{shell_experiment, ShellExperimentConfig, ShellPreset, ShellReport, ShellRow};
pub use subgoal::{empirical_quantile, subgoal_experiment, SubgoalExperimentConfig, SubgoalReport};

use crate::tasks::markov::MarkovError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TheoryError {
    #[error("{what} too large for exact computation (limit {limit})")]
    TooLarge { what: &'static str, limit: usize },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Outcome of one inequality or trend check in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub(crate) fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(mut self, other: Moments) -> Moments {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub(crate) fn estimate(&self) -> Estimate {
        if self.n == 0 {
            return Estimate { mean: f64::NAN, se: f64::NAN };
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 { ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        Estimate { mean, se: (var / n).sqrt() }
    }
}

pub(crate) const CHUNK: usize = 4096;

/// Runs `n` samples in chunks of [`CHUNK`]; chunk `c` draws from stream
/// `stream + c` of `seed`. `f` fills one accumulator per chunk and the
/// chunks are merged in index order.
pub(crate) fn sample_chunks<F>(seed: u64, stream: u64, n: usize, f: F) -> Vec<Moments>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<Moments> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream + c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            f(&mut rng, count)
        })
        .collect();
    let mut out: Vec<Moments> = Vec::new();
    for part in parts {
        if out.is_empty() {
            out = part;
        } else {
            for (acc, m) in out.iter_mut().zip(part) {
                *acc = acc.merge(m);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn moments_match_direct_formulas() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        let e = m.estimate();
        assert!((e.mean - 3.5).abs() < 1e-12);
        let var = xs.iter().map(|x| (x - 3.5f64).powi(2)).sum::<f64>() / 3.0;
        assert!((e.se - (var / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn chunked_sampling_is_thread_count_independent() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                sample_chunks(9, 0, 3 * CHUNK + 17, |rng, n| {
                    let mut m = Moments::default();
                    (0..n).for_each(|_| m.push(rng.gen::<f64>()));
                    vec![m]
                })[0]
                    .estimate()
            })
        };
        assert_eq!(run(1), run(4));
    }
}
