use std::fmt;

use serde::{Deserialize, Serialize};

/// An ordered sequence of task-owned steps.
///
/// The empty trajectory is the search root. `terminal` is set by the task's
/// terminal predicate; terminal trajectories are never expanded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub steps: Vec<S>,
    pub terminal: bool,
}

impl<S> Trajectory<S> {
    pub fn root() -> Self {
        Self { steps: Vec::new(), terminal: false }
    }

    pub fn new(steps: Vec<S>, terminal: bool) -> Self {
        Self { steps, terminal }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl<S> Default for Trajectory<S> {
    fn default() -> Self {
        Self::root()
    }
}

impl<S: fmt::Display> fmt::Display for Trajectory<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, step) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{step}")?;
        }
        write!(f, "]")?;
        if self.terminal {
            write!(f, " (terminal)")?;
        }
        Ok(())
    }
}

/// Length of the longest shared leading run of steps.
pub fn common_prefix_len<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// The splice anatomy of a parent pair: shared prefix length and both suffixes.
#[derive(Debug, Clone, Copy)]
pub struct Splice<'a, S> {
    pub shared: usize,
    pub suffix_a: &'a [S],
    pub suffix_b: &'a [S],
}

impl<'a, S: PartialEq> Splice<'a, S> {
    pub fn of(a: &'a [S], b: &'a [S]) -> Self {
        let shared = common_prefix_len(a, b);
        Self { shared, suffix_a: &a[shared..], suffix_b: &b[shared..] }
    }
}
