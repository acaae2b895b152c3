//! Circle packing in the unit square on an integer grid.
//!
//! Coordinates and radii are integers in units of `1 / GRID`. A trajectory
//! is decoded step by step: `place` appends a circle (while fewer than
//! `n_circles` exist), `adjust` nudges an existing one, and `finalize` ends
//! the trajectory. Partial trajectories decode to the circles placed so far.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DecomposeError, PolicyError, Task, VerifyError};
use crate::goal::{Goal, GoalSpec};
use crate::trajectory::Trajectory;

pub const GRID: i32 = 100;

/// Distance slack for tangency and wall contact, in unit-square lengths.
pub const CONTACT_TOLERANCE: f64 = 0.015;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CircleStep {
    Place { x: i32, y: i32, r: i32 },
    Adjust { index: usize, dx: i32, dy: i32, dr: i32 },
    Finalize,
}

impl fmt::Display for CircleStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircleStep::Place { x, y, r } => write!(f, "place({x},{y},{r})"),
            CircleStep::Adjust { index, dx, dy, dr } => write!(f, "adjust({index},{dx},{dy},{dr})"),
            CircleStep::Finalize => write!(f, "finalize"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Circle {
    fn from_grid(x: i32, y: i32, r: i32) -> Self {
        let g = GRID as f64;
        Self { x: x as f64 / g, y: y as f64 / g, r: r.max(0) as f64 / g }
    }

    fn distance(&self, o: &Circle) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// Decodes the circles a step sequence describes.
pub fn decode(steps: &[CircleStep], n_circles: usize) -> Vec<Circle> {
    let mut grid: Vec<(i32, i32, i32)> = Vec::new();
    for s in steps {
        match *s {
            CircleStep::Place { x, y, r } if grid.len() < n_circles => grid.push((x, y, r.max(0))),
            CircleStep::Adjust { index, dx, dy, dr } => {
                if let Some(c) = grid.get_mut(index) {
                    c.0 += dx;
                    c.1 += dy;
                    c.2 = (c.2 + dr).max(0);
                }
            }
            _ => {}
        }
    }
    grid.into_iter().map(|(x, y, r)| Circle::from_grid(x, y, r)).collect()
}

/// Tolerance below which an overlap or wall excursion is ignored.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Total overlap depth plus total boundary excursion, each term counted
/// only beyond [`FEASIBILITY_SLACK`]; zero iff feasible.
pub fn violation(circles: &[Circle]) -> f64 {
    let excess = |d: f64| if d > FEASIBILITY_SLACK { d } else { 0.0 };
    let mut v = 0.0;
    for (i, a) in circles.iter().enumerate() {
        v += excess(a.r - a.x) + excess(a.x + a.r - 1.0) + excess(a.r - a.y) + excess(a.y + a.r - 1.0);
        for b in &circles[i + 1..] {
            v += excess(a.r + b.r - a.distance(b));
        }
    }
    v
}

pub fn radius_sum(circles: &[Circle]) -> f64 {
    circles.iter().map(|c| c.r).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CircleCheck {
    /// Penalized, normalized radius sum.
    Packing,
    /// At least `count` circles with radius at least `threshold`.
    RadiusAbove { threshold: f64, count: usize },
    /// At least `target` circle pairs touching within tolerance.
    TangentPairs { target: usize },
    /// At least `target` circles touching a wall within tolerance.
    BoundaryContacts { target: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleConfig {
    pub n_circles: usize,
    /// Radius sum that normalizes the score to 1.
    pub reference: f64,
    pub radius_threshold: f64,
    pub radius_count: usize,
    pub tangent_target: usize,
    pub boundary_target: usize,
    /// Probability of finalizing at each step once all circles are placed.
    pub finalize_prob: f64,
}

impl Default for CircleConfig {
    fn default() -> Self {
        Self {
            n_circles: 6,
            reference: 1.0,
            radius_threshold: 0.1,
            radius_count: 3,
            tangent_target: 5,
            boundary_target: 4,
            finalize_prob: 0.3,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CircleError {
    #[error("need at least one circle")]
    NoCircles,
    #[error("reference radius sum must be positive")]
    BadReference,
    #[error("finalize probability must lie in (0, 1]")]
    BadFinalize,
}

#[derive(Debug, Clone)]
pub struct CirclePackingTask {
    cfg: CircleConfig,
}

impl CirclePackingTask {
    pub fn new(cfg: CircleConfig) -> Result<Self, CircleError> {
        if cfg.n_circles == 0 {
            return Err(CircleError::NoCircles);
        }
        if !(cfg.reference > 0.0) {
            return Err(CircleError::BadReference);
        }
        if !(cfg.finalize_prob > 0.0 && cfg.finalize_prob <= 1.0) {
            return Err(CircleError::BadFinalize);
        }
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &CircleConfig {
        &self.cfg
    }

    pub fn decode(&self, steps: &[CircleStep]) -> Vec<Circle> {
        decode(steps, self.cfg.n_circles)
    }

    /// `min(1, S / reference)` when feasible; otherwise half of that,
    /// shrunk further by the violation.
    pub fn packing_score(&self, circles: &[Circle]) -> f64 {
        let base = (radius_sum(circles) / self.cfg.reference).min(1.0);
        let v = violation(circles);
        if v == 0.0 {
            base
        } else {
            0.5 * base / (1.0 + v)
        }
    }

    /// The dense local verifiers used as the root's first decomposition.
    pub fn local_verifiers(&self) -> Vec<GoalSpec<CircleCheck>> {
        let c = &self.cfg;
        vec![
            goal(CircleCheck::RadiusAbove { threshold: c.radius_threshold, count: c.radius_count }),
            goal(CircleCheck::TangentPairs { target: c.tangent_target }),
            goal(CircleCheck::BoundaryContacts { target: c.boundary_target }),
        ]
    }

    /// Largest grid radius for a circle centred at `(x, y)` that stays inside
    /// the square and clear of `others`.
    fn max_radius(x: i32, y: i32, others: &[Circle]) -> i32 {
        let c = Circle::from_grid(x, y, 0);
        let mut r = c.x.min(c.y).min(1.0 - c.x).min(1.0 - c.y);
        for o in others {
            r = r.min(c.distance(o) - o.r);
        }
        ((r * GRID as f64).floor() as i32).max(0)
    }
}

fn goal(check: CircleCheck) -> GoalSpec<CircleCheck> {
    let text = match check {
        CircleCheck::Packing => "maximize the radius sum".to_string(),
        CircleCheck::RadiusAbove { threshold, count } => format!("at least {count} circles with r >= {threshold}"),
        CircleCheck::TangentPairs { target } => format!("at least {target} tangent pairs"),
        CircleCheck::BoundaryContacts { target } => format!("at least {target} circles touching a wall"),
    };
    GoalSpec::new(text, check)
}

fn dense(actual: usize, target: usize) -> f64 {
    if target == 0 {
        1.0
    } else {
        (actual as f64 / target as f64).min(1.0)
    }
}

/// Halves a count target: `[ceil(t / 2), t - 1]`, both strictly weaker.
fn weaker(target: usize) -> Option<(usize, usize)> {
    (target >= 3).then(|| (target.div_ceil(2), target - 1))
}

impl Task for CirclePackingTask {
    type Step = CircleStep;
    type Check = CircleCheck;

    fn name(&self) -> &'static str {
        "circles"
    }

    fn next_step(&self, prefix: &[CircleStep], rng: &mut dyn RngCore) -> Result<CircleStep, PolicyError> {
        let circles = self.decode(prefix);
        if circles.len() < self.cfg.n_circles {
            // a few tries for a centre with room; the last one is kept regardless
            let mut spot = (0, 0, 0);
            for _ in 0..32 {
                let x = rng.gen_range(5..=GRID - 5);
                let y = rng.gen_range(5..=GRID - 5);
                spot = (x, y, Self::max_radius(x, y, &circles));
                if spot.2 >= 1 {
                    break;
                }
            }
            let (x, y, cap) = spot;
            let r = if cap == 0 { 0 } else { rng.gen_range((cap + 1) / 2..=cap) };
            return Ok(CircleStep::Place { x, y, r });
        }
        if rng.gen_bool(self.cfg.finalize_prob) {
            return Ok(CircleStep::Finalize);
        }
        let index = rng.gen_range(0..circles.len());
        let (dx, dy) = (rng.gen_range(-1..=1), rng.gen_range(-1..=1));
        let dr = if violation(&circles) > 0.0 { -1 } else { rng.gen_range(0..=1) };
        Ok(CircleStep::Adjust { index, dx, dy, dr })
    }

    fn is_terminal(&self, steps: &[CircleStep]) -> bool {
        matches!(steps.last(), Some(CircleStep::Finalize))
    }

    fn root_goal(&self) -> GoalSpec<CircleCheck> {
        goal(CircleCheck::Packing)
    }

    fn verify(&self, check: &CircleCheck, t: &Trajectory<CircleStep>) -> Result<f64, VerifyError> {
        let circles = self.decode(&t.steps);
        let tol = CONTACT_TOLERANCE;
        Ok(match *check {
            CircleCheck::Packing => {
                let s = self.packing_score(&circles);
                // only a finalized packing can be fully correct
                if t.terminal {
                    s
                } else {
                    s.min(0.99)
                }
            }
            CircleCheck::RadiusAbove { threshold, count } => {
                dense(circles.iter().filter(|c| c.r >= threshold - 1e-12).count(), count)
            }
            CircleCheck::TangentPairs { target } => {
                let mut pairs = 0;
                for (i, a) in circles.iter().enumerate() {
                    for b in &circles[i + 1..] {
                        if (a.distance(b) - a.r - b.r).abs() <= tol {
                            pairs += 1;
                        }
                    }
                }
                dense(pairs, target)
            }
            CircleCheck::BoundaryContacts { target } => {
                let touching = circles
                    .iter()
                    .filter(|c| [c.x - c.r, 1.0 - c.x - c.r, c.y - c.r, 1.0 - c.y - c.r].iter().any(|g| g.abs() <= tol))
                    .count();
                dense(touching, target)
            }
        })
    }

    fn decompose(&self, leaf: &Goal<CircleCheck>, _rng: &mut dyn RngCore) -> Result<Vec<GoalSpec<CircleCheck>>, DecomposeError> {
        let split = |t: usize, make: &dyn Fn(usize) -> CircleCheck| match weaker(t) {
            Some((a, b)) => Ok(vec![goal(make(a)), goal(make(b))]),
            None => Err(DecomposeError::AtomicGoal),
        };
        match leaf.check {
            CircleCheck::Packing => Ok(self.local_verifiers()),
            CircleCheck::RadiusAbove { threshold, count } => {
                split(count, &|c| CircleCheck::RadiusAbove { threshold, count: c })
            }
            CircleCheck::TangentPairs { target } => split(target, &|t| CircleCheck::TangentPairs { target: t }),
            CircleCheck::BoundaryContacts { target } => split(target, &|t| CircleCheck::BoundaryContacts { target: t }),
        }
    }

    fn raw_objective(&self, t: &Trajectory<CircleStep>) -> f64 {
        let circles = self.decode(&t.steps);
        let s = radius_sum(&circles);
        let v = violation(&circles);
        if v == 0.0 {
            s
        } else {
            0.5 * s / (1.0 + v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn task() -> CirclePackingTask {
        CirclePackingTask::new(CircleConfig::default()).unwrap()
    }

    fn place(x: i32, y: i32, r: i32) -> CircleStep {
        CircleStep::Place { x, y, r }
    }

    #[test]
    fn empty_placement_scores_zero_everywhere() {
        let t = task();
        let empty = t.label(vec![]);
        for g in t.local_verifiers() {
            assert_eq!(t.verify(&g.check, &empty).unwrap(), 0.0);
        }
        assert_eq!(t.verify(&CircleCheck::Packing, &empty).unwrap(), 0.0);
    }

    #[test]
    fn radius_threshold_partial_credit() {
        let t = task();
        let traj = t.label(vec![place(20, 20, 15), place(60, 60, 12), place(90, 10, 5)]);
        let check = CircleCheck::RadiusAbove { threshold: 0.1, count: 3 };
        assert!((t.verify(&check, &traj).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn saturated_targets_score_one() {
        let t = task();
        // two tangent circles on the bottom wall
        let traj = t.label(vec![place(25, 25, 25), place(75, 25, 25)]);
        assert_eq!(t.verify(&CircleCheck::TangentPairs { target: 1 }, &traj).unwrap(), 1.0);
        assert_eq!(t.verify(&CircleCheck::BoundaryContacts { target: 2 }, &traj).unwrap(), 1.0);
        assert_eq!(t.verify(&CircleCheck::RadiusAbove { threshold: 0.2, count: 2 }, &traj).unwrap(), 1.0);
    }

    #[test]
    fn overlap_scores_below_feasible_with_same_sum() {
        let t = task();
        let overlapping = t.label(vec![place(30, 30, 20), place(50, 30, 20), CircleStep::Finalize]);
        let apart = t.label(vec![place(25, 25, 20), place(75, 75, 20), CircleStep::Finalize]);
        let (a, b) = (t.decode(&overlapping.steps), t.decode(&apart.steps));
        assert_eq!(radius_sum(&a), radius_sum(&b));
        assert!(violation(&a) > 0.0 && violation(&b) == 0.0);
        assert!(t.verify(&CircleCheck::Packing, &overlapping).unwrap() < t.verify(&CircleCheck::Packing, &apart).unwrap());
    }

    #[test]
    fn adjust_and_place_cap() {
        let steps = vec![
            place(50, 50, 10),
            CircleStep::Adjust { index: 0, dx: 1, dy: -1, dr: -20 },
            CircleStep::Adjust { index: 7, dx: 1, dy: 1, dr: 1 },
        ];
        let c = decode(&steps, 1);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].r, 0.0);
        assert!((c[0].x - 0.51).abs() < 1e-12);
        assert_eq!(decode(&[place(10, 10, 5), place(30, 30, 5)], 1).len(), 1);
    }

    #[test]
    fn policy_places_feasible_circles() {
        let t = task();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let mut steps = Vec::new();
            for _ in 0..6 {
                steps.push(Task::next_step(&t, &steps, &mut rng).unwrap());
            }
            assert!(violation(&t.decode(&steps)) <= 1e-9);
        }
    }

    #[test]
    fn decomposition_weakens_targets() {
        let t = task();
        let tree = crate::goal::GoalTree::new(t.root_goal());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(t.decompose(tree.root(), &mut rng).unwrap().len(), 3);
        let g = crate::goal::GoalTree::new(goal(CircleCheck::TangentPairs { target: 5 }));
        let kids: Vec<CircleCheck> = t.decompose(g.root(), &mut rng).unwrap().into_iter().map(|k| k.check).collect();
        assert_eq!(kids, vec![CircleCheck::TangentPairs { target: 3 }, CircleCheck::TangentPairs { target: 4 }]);
        let atom = crate::goal::GoalTree::new(goal(CircleCheck::BoundaryContacts { target: 2 }));
        assert_eq!(t.decompose(atom.root(), &mut rng), Err(DecomposeError::AtomicGoal));
    }
}
