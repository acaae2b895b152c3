use std::cell::RefCell;

use bes::backward::{backward_score, pair_score};
use bes::tasks::{CheckRegistry, VerifyError};
use bes::{GoalId, GoalSpec, GoalTree, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain nested tree used by the reference recursion. Node `i` has
/// verifier handle `i`.
struct Shape {
    children: Vec<Vec<usize>>,
    ordered: Vec<bool>,
}

fn random_shape(rng: &mut ChaCha8Rng) -> Shape {
    let mut children = vec![vec![]];
    let mut ordered = vec![rng.gen_bool(0.3)];
    let mut depth = vec![0];
    let mut i = 0;
    while i < children.len() {
        if depth[i] < 4 && rng.gen_bool(0.6) {
            for _ in 0..rng.gen_range(1..=3) {
                let id = children.len();
                children.push(vec![]);
                ordered.push(rng.gen_bool(0.3));
                depth.push(depth[i] + 1);
                children[i].push(id);
            }
        }
        i += 1;
    }
    Shape { children, ordered }
}

/// The same shape as a goal tree; returns the goal id of every node.
fn build(shape: &Shape) -> (GoalTree<usize>, Vec<GoalId>) {
    let spec = |i: usize| {
        let s = GoalSpec::new(format!("g{i}"), i);
        if shape.ordered[i] {
            s.ordered()
        } else {
            s
        }
    };
    let mut tree = GoalTree::new(spec(0));
    let mut ids = vec![GoalId(0); shape.children.len()];
    ids[0] = tree.root_id();
    for i in 0..shape.children.len() {
        if !shape.children[i].is_empty() {
            let got = tree.attach_children(ids[i], shape.children[i].iter().map(|&c| spec(c)).collect());
            for (&c, g) in shape.children[i].iter().zip(got) {
                ids[c] = g;
            }
        }
    }
    (tree, ids)
}

fn reference(shape: &Shape, node: usize, alpha: f64, v: &dyn Fn(usize) -> f64) -> f64 {
    let own = v(node);
    if own == 1.0 {
        return 1.0;
    }
    let kids = &shape.children[node];
    if kids.is_empty() {
        return own;
    }
    let mut total = 0.0;
    let mut open = true;
    for &k in kids {
        if open {
            let s = reference(shape, k, alpha, v);
            total += s;
            if shape.ordered[node] && s != 1.0 {
                open = false;
            }
        }
    }
    alpha * own + (1.0 - alpha) * (total / kids.len() as f64)
}

/// Verifier values indexed by `[trajectory tag][handle]`; logs every call.
struct Table {
    values: Vec<Vec<f64>>,
    log: RefCell<Vec<usize>>,
}

impl CheckRegistry<usize, usize> for Table {
    fn evaluate(&self, check: &usize, t: &Trajectory<usize>) -> Result<f64, VerifyError> {
        self.log.borrow_mut().push(*check);
        Ok(self.values[t.steps[0]][*check])
    }
}

fn random_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.gen_range(0..4) {
            0 => 1.0,
            1 => 0.0,
            _ => rng.gen_range(0.0..1.0),
        })
        .collect()
}

fn descendants(shape: &Shape, node: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = shape.children[node].clone();
    while let Some(n) = stack.pop() {
        out.push(n);
        stack.extend(&shape.children[n]);
    }
    out
}

fn assert_short_circuit(shape: &Shape, log: &[usize], value: &dyn Fn(usize) -> f64) {
    for &g in log {
        if value(g) == 1.0 {
            for d in descendants(shape, g) {
                assert!(!log.contains(&d), "goal {d} evaluated below solved goal {g}");
            }
        }
    }
}

#[test]
fn production_scores_equal_reference_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let shape = random_shape(&mut rng);
        let (tree, ids) = build(&shape);
        let n = shape.children.len();
        let table = Table { values: vec![random_values(n, &mut rng), random_values(n, &mut rng)], log: RefCell::default() };
        let alpha = rng.gen_range(0.0..1.0);
        let (a, b) = (Trajectory::new(vec![0], true), Trajectory::new(vec![1], true));

        let va = |i: usize| table.values[0][i];
        let vb = |i: usize| table.values[1][i];
        let vmax = |i: usize| va(i).max(vb(i));

        let got = backward_score(&a, ids[0], &tree, alpha, &table);
        assert_eq!(got.score, reference(&shape, 0, alpha, &va));
        assert_short_circuit(&shape, &table.log.borrow(), &va);
        assert_eq!(got.verifier_calls, table.log.borrow().len());
        assert!((0.0..=1.0).contains(&got.score));
        table.log.borrow_mut().clear();

        let sb = backward_score(&b, ids[0], &tree, alpha, &table).score;
        assert_eq!(sb, reference(&shape, 0, alpha, &vb));
        table.log.borrow_mut().clear();

        let pair = pair_score(&a, &b, ids[0], &tree, alpha, &table);
        assert_eq!(pair.score, reference(&shape, 0, alpha, &vmax));
        assert_short_circuit(&shape, &table.log.borrow(), &vmax);
        table.log.borrow_mut().clear();
        assert!((0.0..=1.0).contains(&pair.score));

        let same = pair_score(&a, &a, ids[0], &tree, alpha, &table).score;
        assert_eq!(same, got.score);
        table.log.borrow_mut().clear();

        assert!(pair.score >= got.score.max(sb) - 1e-12, "{} < max({}, {})", pair.score, got.score, sb);
    }
}

#[test]
fn solved_root_never_touches_children() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..200 {
        let shape = random_shape(&mut rng);
        let (tree, ids) = build(&shape);
        let mut values = random_values(shape.children.len(), &mut rng);
        values[0] = 1.0;
        let table = Table { values: vec![values], log: RefCell::default() };
        let r = backward_score(&Trajectory::new(vec![0], true), ids[0], &tree, 0.3, &table);
        assert_eq!(r.score, 1.0);
        assert_eq!(r.verifier_calls, 1);
        assert_eq!(*table.log.borrow(), vec![0]);
    }
}

#[test]
fn worked_examples() {
    let mut tree = GoalTree::new(GoalSpec::new("root", 0usize));
    tree.attach_children(tree.root_id(), vec![GoalSpec::new("c1", 1), GoalSpec::new("c2", 2)]);
    let table = Table { values: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], log: RefCell::default() };
    let (a, b) = (Trajectory::new(vec![0], true), Trajectory::new(vec![1], true));
    let sa = backward_score(&a, tree.root_id(), &tree, 0.3, &table).score;
    let sb = backward_score(&b, tree.root_id(), &tree, 0.3, &table).score;
    let p = pair_score(&a, &b, tree.root_id(), &tree, 0.3, &table).score;
    assert!((sa - 0.35).abs() < 1e-12 && (sb - 0.35).abs() < 1e-12);
    assert!((p - 0.70).abs() < 1e-12);
}
