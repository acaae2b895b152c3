//! Direct step-sequence edits. Each randomized operator has a `_at` twin that
//! takes its indices explicitly; the randomized form only draws the indices.
//!
//! Index conventions follow the usual 1-based splice notation: `s` is the
//! shared-prefix length, `sigma_a`/`sigma_b` the suffixes with lengths
//! `m_a`/`m_b`.

use rand::Rng;
use thiserror::Error;

use crate::trajectory::Splice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OperatorError {
    /// Deletion needs an interior step, so at least three steps.
    #[error("trajectory too short to delete an interior step")]
    TooShort,
    /// A two-parent operator needs a non-empty suffix that it does not have.
    #[error("parent suffix beyond the shared prefix is empty")]
    EmptySuffix,
    #[error("operator index out of range")]
    IndexOutOfRange,
}

/// `prefix ⊕ σ_a ⊕ σ_b`.
pub fn combine<S: Clone + PartialEq>(a: &[S], b: &[S]) -> Vec<S> {
    let sp = Splice::of(a, b);
    let mut out = Vec::with_capacity(sp.shared + sp.suffix_a.len() + sp.suffix_b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(sp.suffix_b);
    out
}

/// Removes step `ell` (1-based, `2 <= ell <= t-1`).
pub fn delete_at<S: Clone>(n: &[S], ell: usize) -> Result<Vec<S>, OperatorError> {
    if n.len() < 3 {
        return Err(OperatorError::TooShort);
    }
    if ell < 2 || ell > n.len() - 1 {
        return Err(OperatorError::IndexOutOfRange);
    }
    let mut out = n.to_vec();
    out.remove(ell - 1);
    Ok(out)
}

/// Deletion with `ell ~ Uniform{2..t-1}`. Returns the output and `ell`.
pub fn delete<S: Clone, R: Rng + ?Sized>(n: &[S], rng: &mut R) -> Result<(Vec<S>, usize), OperatorError> {
    if n.len() < 3 {
        return Err(OperatorError::TooShort);
    }
    let ell = rng.gen_range(2..=n.len() - 1);
    delete_at(n, ell).map(|out| (out, ell))
}

/// `prefix ⊕ σ_a[1:r-1] ⊕ (σ_b)_q ⊕ σ_a[r+1:m_a]`, with 1-based `r`, `q`.
pub fn translocate_at<S: Clone + PartialEq>(a: &[S], b: &[S], r: usize, q: usize) -> Result<Vec<S>, OperatorError> {
    let sp = Splice::of(a, b);
    let (ma, mb) = (sp.suffix_a.len(), sp.suffix_b.len());
    if ma == 0 || mb == 0 {
        return Err(OperatorError::EmptySuffix);
    }
    if !(1..=ma).contains(&r) || !(1..=mb).contains(&q) {
        return Err(OperatorError::IndexOutOfRange);
    }
    let mut out = a.to_vec();
    out[sp.shared + r - 1] = sp.suffix_b[q - 1].clone();
    Ok(out)
}

/// Translocation with `r ~ Uniform{1..m_a}`, `q ~ Uniform{1..m_b}`.
pub fn translocate<S: Clone + PartialEq, R: Rng + ?Sized>(
    a: &[S],
    b: &[S],
    rng: &mut R,
) -> Result<(Vec<S>, usize, usize), OperatorError> {
    let sp = Splice::of(a, b);
    let (ma, mb) = (sp.suffix_a.len(), sp.suffix_b.len());
    if ma == 0 || mb == 0 {
        return Err(OperatorError::EmptySuffix);
    }
    let r = rng.gen_range(1..=ma);
    let q = rng.gen_range(1..=mb);
    translocate_at(a, b, r, q).map(|out| (out, r, q))
}

/// `prefix ⊕ σ_a[1:i] ⊕ σ_b[j+1:m_b]` with `i ∈ {0..m_a}`, `j ∈ {0..m_b-1}`.
pub fn crossover_at<S: Clone + PartialEq>(a: &[S], b: &[S], i: usize, j: usize) -> Result<Vec<S>, OperatorError> {
    let sp = Splice::of(a, b);
    let (ma, mb) = (sp.suffix_a.len(), sp.suffix_b.len());
    if mb == 0 {
        return Err(OperatorError::EmptySuffix);
    }
    if i > ma || j >= mb {
        return Err(OperatorError::IndexOutOfRange);
    }
    let mut out = Vec::with_capacity(sp.shared + i + mb - j);
    out.extend_from_slice(&a[..sp.shared + i]);
    out.extend_from_slice(&sp.suffix_b[j..]);
    Ok(out)
}

/// Crossover with `i`, `j` drawn uniformly from their ranges.
pub fn crossover<S: Clone + PartialEq, R: Rng + ?Sized>(
    a: &[S],
    b: &[S],
    rng: &mut R,
) -> Result<(Vec<S>, usize, usize), OperatorError> {
    let sp = Splice::of(a, b);
    let (ma, mb) = (sp.suffix_a.len(), sp.suffix_b.len());
    if mb == 0 {
        return Err(OperatorError::EmptySuffix);
    }
    let i = rng.gen_range(0..=ma);
    let j = rng.gen_range(0..mb);
    crossover_at(a, b, i, j).map(|out| (out, i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[&'static str]) -> Vec<&'static str> {
        xs.to_vec()
    }

    #[test]
    fn combine_examples() {
        assert_eq!(combine(&v(&["p", "a1"]), &v(&["p", "b1"])), v(&["p", "a1", "b1"]));
        assert_eq!(combine(&v(&["p"]), &v(&["p"])), v(&["p"]));
        assert_eq!(combine(&v(&["p", "a1", "a2"]), &v(&["p", "b1"])), v(&["p", "a1", "a2", "b1"]));
    }

    #[test]
    fn delete_examples() {
        assert_eq!(delete_at(&v(&["s1", "s2", "s3"]), 2).unwrap(), v(&["s1", "s3"]));
        assert_eq!(delete_at(&v(&["s1", "s2"]), 2), Err(OperatorError::TooShort));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(delete(&v(&["s1", "s2"]), &mut rng), Err(OperatorError::TooShort));
    }

    #[test]
    fn delete_replays_seeded_draw() {
        let n = v(&["s1", "s2", "s3", "s4"]);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (out, ell) = delete(&n, &mut rng).unwrap();
            let mut replay = ChaCha8Rng::seed_from_u64(seed);
            let expected_ell = replay.gen_range(2..=3usize);
            assert_eq!(ell, expected_ell);
            let expected = if ell == 2 { v(&["s1", "s3", "s4"]) } else { v(&["s1", "s2", "s4"]) };
            assert_eq!(out, expected);
        }
    }

    #[test]
    fn translocate_examples() {
        assert_eq!(translocate_at(&v(&["p", "a1", "a2"]), &v(&["p", "b1"]), 2, 1).unwrap(), v(&["p", "a1", "b1"]));
        assert_eq!(translocate_at(&v(&["p", "a1"]), &v(&["p", "b1"]), 1, 1).unwrap(), v(&["p", "b1"]));
        assert_eq!(
            translocate_at(&v(&["p", "a1", "a2", "a3"]), &v(&["p", "b1", "b2"]), 2, 2).unwrap(),
            v(&["p", "a1", "b2", "a3"])
        );
        assert_eq!(translocate_at(&v(&["p"]), &v(&["p", "b1"]), 1, 1), Err(OperatorError::EmptySuffix));
        assert_eq!(translocate_at(&v(&["p", "a1"]), &v(&["p"]), 1, 1), Err(OperatorError::EmptySuffix));
    }

    #[test]
    fn crossover_examples() {
        let a = v(&["p", "a1", "a2"]);
        let b = v(&["p", "b1", "b2"]);
        assert_eq!(crossover_at(&a, &b, 1, 1).unwrap(), v(&["p", "a1", "b2"]));
        assert_eq!(crossover_at(&a, &b, 0, 0).unwrap(), b);
        assert_eq!(crossover_at(&v(&["p", "a1"]), &b, 1, 0).unwrap(), v(&["p", "a1", "b1", "b2"]));
        assert_eq!(crossover_at(&b, &v(&["p"]), 0, 0), Err(OperatorError::EmptySuffix));
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        let a = v(&["p", "a1"]);
        let b = v(&["p", "b1"]);
        assert_eq!(translocate_at(&a, &b, 2, 1), Err(OperatorError::IndexOutOfRange));
        assert_eq!(crossover_at(&a, &b, 2, 0), Err(OperatorError::IndexOutOfRange));
        assert_eq!(crossover_at(&a, &b, 0, 1), Err(OperatorError::IndexOutOfRange));
        assert_eq!(delete_at(&v(&["a", "b", "c"]), 3), Err(OperatorError::IndexOutOfRange));
    }
}
