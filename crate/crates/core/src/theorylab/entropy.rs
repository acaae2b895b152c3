//! Exact information quantities of an order-1 chain, in nats.

use super::TheoryError;
use crate::tasks::markov::MarkovTask;

pub const MAX_ALPHABET: usize = 16;
pub const MAX_HORIZON: usize = 64;
/// Largest `A^T` the enumeration routines will visit.
pub const MAX_ENUMERATED: usize = 1 << 20;

pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn check_caps(task: &MarkovTask, horizon: usize) -> Result<(), TheoryError> {
    if task.alphabet() > MAX_ALPHABET {
        return Err(TheoryError::TooLarge { what: "alphabet", limit: MAX_ALPHABET });
    }
    if horizon > MAX_HORIZON {
        return Err(TheoryError::TooLarge { what: "horizon", limit: MAX_HORIZON });
    }
    Ok(())
}

fn step_marginal(task: &MarkovTask, m: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; m.len()];
    for (s, &w) in m.iter().enumerate() {
        for (u, &p) in task.transitions()[s].iter().enumerate() {
            next[u] += w * p;
        }
    }
    next
}

/// Law of `Y_t` at 0-based position `t`.
pub fn marginal(task: &MarkovTask, t: usize) -> Vec<f64> {
    let mut m = task.init().to_vec();
    for _ in 0..t {
        m = step_marginal(task, &m);
    }
    m
}

/// `H_T = H(Y_1) + Σ_{t≥2} Σ_s P(Y_{t-1}=s) H(row s)`.
pub fn exact_trajectory_entropy(task: &MarkovTask, horizon: usize) -> Result<f64, TheoryError> {
    check_caps(task, horizon)?;
    if horizon == 0 {
        return Ok(0.0);
    }
    let row_h: Vec<f64> = task.transitions().iter().map(|r| shannon(r)).collect();
    let mut m = task.init().to_vec();
    let mut h = shannon(&m);
    for _ in 1..horizon {
        h += m.iter().zip(&row_h).map(|(w, rh)| w * rh).sum::<f64>();
        m = step_marginal(task, &m);
    }
    Ok(h)
}

/// Mean marginal entropy `(1/T) Σ_t H(Y_t)`.
pub fn per_step_entropy(task: &MarkovTask, horizon: usize) -> Result<f64, TheoryError> {
    check_caps(task, horizon)?;
    if horizon == 0 {
        return Ok(0.0);
    }
    let mut m = task.init().to_vec();
    let mut total = 0.0;
    for _ in 0..horizon {
        total += shannon(&m);
        m = step_marginal(task, &m);
    }
    Ok(total / horizon as f64)
}

fn check_boundaries(boundaries: &[usize], horizon: usize) -> Result<(), TheoryError> {
    if boundaries.windows(2).any(|w| w[0] >= w[1]) || boundaries.iter().any(|&b| b == 0 || b >= horizon) {
        return Err(TheoryError::Invalid(format!("block starts {boundaries:?} do not partition 0..{horizon}")));
    }
    Ok(())
}

/// Block total correlation over `0..task.horizon()` with interior block
/// starts `boundaries`. For an order-1 chain the blocks only interact
/// through adjacent symbols across each cut, so the total reduces to
/// `Σ_j I(Y_{b_j - 1}; Y_{b_j})`.
pub fn exact_block_total_correlation(task: &MarkovTask, boundaries: &[usize]) -> Result<f64, TheoryError> {
    let horizon = task.horizon();
    check_caps(task, horizon)?;
    check_boundaries(boundaries, horizon)?;
    let mut tc = 0.0;
    for &b in boundaries {
        let before = marginal(task, b - 1);
        let after = step_marginal(task, &before);
        let cond: f64 = before.iter().zip(task.transitions()).map(|(w, row)| w * shannon(row)).sum();
        tc += shannon(&after) - cond;
    }
    Ok(tc)
}

fn for_each_sequence(alphabet: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut seq = vec![0usize; len];
    loop {
        f(&seq);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < alphabet {
                break;
            }
            seq[i] = 0;
        }
    }
}

/// `Σ_j H(U_j) − H(U_1..U_k)` from exhaustive enumeration of every length-T
/// sequence.
pub fn block_total_correlation_enumerated(task: &MarkovTask, boundaries: &[usize]) -> Result<f64, TheoryError> {
    let (a, horizon) = (task.alphabet(), task.horizon());
    check_boundaries(boundaries, horizon)?;
    let space = (a as f64).powi(horizon as i32);
    if space > MAX_ENUMERATED as f64 {
        return Err(TheoryError::TooLarge { what: "sequence space", limit: MAX_ENUMERATED });
    }
    let mut cuts = vec![0];
    cuts.extend_from_slice(boundaries);
    cuts.push(horizon);
    let index = |s: &[usize]| s.iter().fold(0usize, |acc, &x| acc * a + x);
    let mut block_laws: Vec<Vec<f64>> = cuts.windows(2).map(|w| vec![0.0; a.pow((w[1] - w[0]) as u32)]).collect();
    let mut joint_h = 0.0;
    for_each_sequence(a, horizon, |seq| {
        let p = task.log_prob(seq).exp();
        if p > 0.0 {
            joint_h -= p * p.ln();
        }
        for (law, w) in block_laws.iter_mut().zip(cuts.windows(2)) {
            law[index(&seq[w[0]..w[1]])] += p;
        }
    });
    Ok(block_laws.iter().map(|l| shannon(l)).sum::<f64>() - joint_h)
}

/// `−Σ P log P` over every length-T sequence.
pub fn enumerated_entropy(task: &MarkovTask, horizon: usize) -> Result<f64, TheoryError> {
    let space = (task.alphabet() as f64).powi(horizon as i32);
    if space > MAX_ENUMERATED as f64 {
        return Err(TheoryError::TooLarge { what: "sequence space", limit: MAX_ENUMERATED });
    }
    let mut h = 0.0;
    for_each_sequence(task.alphabet(), horizon, |seq| {
        let lp = task.log_prob(seq);
        h -= lp.exp() * lp;
    });
    Ok(h)
}
