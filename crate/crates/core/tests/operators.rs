use bes::forward::{combine, crossover, crossover_at, delete, delete_at, translocate, translocate_at, OperatorError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Steps are symbols `0..3`.
fn all_sequences(alphabet: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for x in 0..alphabet {
                let mut t: Vec<u8> = s.clone();
                t.push(x);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn shared(a: &[u8], b: &[u8]) -> usize {
    let mut s = 0;
    while s < a.len() && s < b.len() && a[s] == b[s] {
        s += 1;
    }
    s
}

fn counts(xs: &[u8]) -> [usize; 3] {
    let mut m = [0; 3];
    for &x in xs {
        m[x as usize] += 1;
    }
    m
}

fn add(x: [usize; 3], y: [usize; 3]) -> [usize; 3] {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

fn within(out: &[u8], have: [usize; 3]) -> bool {
    counts(out).iter().zip(have).all(|(&c, h)| c <= h)
}

/// Checks every valid operator application on one ordered pair; returns
/// the number of outputs checked.
fn check_pair(a: &[u8], b: &[u8]) -> usize {
    let s = shared(a, b);
    let (ma, mb) = (a.len() - s, b.len() - s);
    let have = add(counts(a), counts(b));
    let mut n = 0;

    let c = combine(a, b);
    assert_eq!(c.len(), s + ma + mb);
    assert!(c[..a.len()] == *a && c[a.len()..] == b[s..]);
    assert!(within(&c, have));
    n += 1;

    if ma == 0 || mb == 0 {
        assert_eq!(translocate_at(a, b, 1, 1), Err(OperatorError::EmptySuffix));
    } else {
        for r in 1..=ma {
            for q in 1..=mb {
                let out = translocate_at(a, b, r, q).unwrap();
                assert_eq!(out.len(), s + ma);
                let at = s + r - 1;
                assert!(out[..at] == a[..at] && out[at] == b[s + q - 1] && out[at + 1..] == a[at + 1..]);
                assert!(within(&out, have));
                n += 1;
            }
        }
    }

    if mb == 0 {
        assert_eq!(crossover_at(a, b, 0, 0), Err(OperatorError::EmptySuffix));
    } else {
        for i in 0..=ma {
            for j in 0..mb {
                let out = crossover_at(a, b, i, j).unwrap();
                assert_eq!(out.len(), s + i + mb - j);
                assert!(out[..s + i] == a[..s + i] && out[s + i..] == b[s + j..]);
                assert!(within(&out, have));
                n += 1;
            }
        }
    }
    n
}

/// Indices just outside the valid ranges are rejected.
fn check_bounds(a: &[u8], b: &[u8]) {
    let s = shared(a, b);
    let (ma, mb) = (a.len() - s, b.len() - s);
    if ma > 0 && mb > 0 {
        for (r, q) in [(0, 1), (1, 0), (ma + 1, 1), (1, mb + 1)] {
            assert_eq!(translocate_at(a, b, r, q), Err(OperatorError::IndexOutOfRange));
        }
    }
    if mb > 0 {
        for (i, j) in [(ma + 1, 0), (0, mb)] {
            assert_eq!(crossover_at(a, b, i, j), Err(OperatorError::IndexOutOfRange));
        }
    }
}

fn check_single(x: &[u8]) -> usize {
    let mut n = 0;
    for ell in 0..=x.len() + 1 {
        let got = delete_at(x, ell);
        if x.len() < 3 {
            assert_eq!(got, Err(OperatorError::TooShort));
        } else if ell < 2 || ell > x.len() - 1 {
            assert_eq!(got, Err(OperatorError::IndexOutOfRange));
        } else {
            let out = got.unwrap();
            assert_eq!(out.len(), x.len() - 1);
            assert_eq!((out[0], out[out.len() - 1]), (x[0], x[x.len() - 1]));
            assert!(within(&out, counts(x)));
            n += 1;
        }
    }
    n
}

#[test]
fn exhaustive_length_laws_and_no_fabrication() {
    let seqs = all_sequences(3, 6);
    assert_eq!(seqs.len(), 1093);
    let singles: usize = seqs.iter().map(|x| check_single(x)).sum();
    let pairs: usize = seqs.par_iter().map(|a| seqs.iter().map(|b| check_pair(a, b)).sum::<usize>()).sum();
    assert!(singles > 0 && pairs > 1_000_000);
}

#[test]
fn out_of_range_indices_are_rejected() {
    let seqs = all_sequences(3, 4);
    for a in &seqs {
        for b in &seqs {
            check_bounds(a, b);
        }
    }
}

#[test]
fn randomized_forms_draw_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = vec![0u8, 1, 2, 2, 1];
    let b = vec![0u8, 2, 0, 1];
    for _ in 0..2000 {
        let (out, ell) = delete(&a, &mut rng).unwrap();
        assert!((2..=4).contains(&ell));
        assert_eq!(out, delete_at(&a, ell).unwrap());

        let (out, r, q) = translocate(&a, &b, &mut rng).unwrap();
        assert!((1..=4).contains(&r) && (1..=3).contains(&q));
        assert_eq!(out, translocate_at(&a, &b, r, q).unwrap());

        let (out, i, j) = crossover(&a, &b, &mut rng).unwrap();
        assert!(i <= 4 && j < 3);
        assert_eq!(out, crossover_at(&a, &b, i, j).unwrap());
    }
}

#[test]
fn every_index_is_reachable() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = vec![1u8, 2, 3, 4, 5, 6];
    let b = vec![1u8, 0, 0, 0];
    let mut seen = std::collections::HashSet::new();
    for _ in 0..5000 {
        let (_, i, j) = crossover(&a, &b, &mut rng).unwrap();
        seen.insert((i, j));
    }
    assert_eq!(seen.len(), 6 * 3);
}
