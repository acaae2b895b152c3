use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoalId(pub usize);

impl fmt::Display for GoalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// A goal proposed by a decomposer, before it is attached to a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSpec<C> {
    pub description: String,
    pub check: C,
    /// Gate each child on all earlier siblings being fully satisfied.
    pub ordered_children: bool,
}

impl<C> GoalSpec<C> {
    pub fn new(description: impl Into<String>, check: C) -> Self {
        Self { description: description.into(), check, ordered_children: false }
    }

    pub fn ordered(mut self) -> Self {
        self.ordered_children = true;
        self
    }
}

/// A node of the backward goal tree. `check` is the task-registered verifier
/// handle evaluated by a [`crate::tasks::CheckRegistry`].
#[derive(Debug, Clone)]
pub struct Goal<C> {
    pub id: GoalId,
    pub description: String,
    pub check: C,
    pub children: Vec<GoalId>,
    pub parent: Option<GoalId>,
    pub depth: usize,
    pub ordered_children: bool,
    /// The decomposer reported this goal cannot be split.
    pub atomic: bool,
}

impl<C> Goal<C> {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Rooted goal tree. Goals are only ever added; the version increments each
/// time a leaf gains children.
#[derive(Debug, Clone)]
pub struct GoalTree<C> {
    goals: Vec<Goal<C>>,
    version: u64,
}

impl<C> GoalTree<C> {
    pub fn new(root: GoalSpec<C>) -> Self {
        let goal = Goal {
            id: GoalId(0),
            description: root.description,
            check: root.check,
            children: Vec::new(),
            parent: None,
            depth: 0,
            ordered_children: root.ordered_children,
            atomic: false,
        };
        Self { goals: vec![goal], version: 0 }
    }

    pub fn root_id(&self) -> GoalId {
        GoalId(0)
    }

    pub fn root(&self) -> &Goal<C> {
        &self.goals[0]
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn get(&self, id: GoalId) -> &Goal<C> {
        &self.goals[id.0]
    }

    pub fn contains(&self, id: GoalId) -> bool {
        id.0 < self.goals.len()
    }

    pub fn goals(&self) -> &[Goal<C>] {
        &self.goals
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Goal<C>> {
        self.goals.iter().filter(|g| g.is_leaf())
    }

    pub fn depth(&self) -> usize {
        self.goals.iter().map(|g| g.depth).max().unwrap_or(0)
    }

    /// Attaches children to a leaf and bumps the version.
    ///
    /// Panics if `leaf` already has children or `children` is empty; both are
    /// engine invariants rather than recoverable conditions.
    pub fn attach_children(&mut self, leaf: GoalId, children: Vec<GoalSpec<C>>) -> Vec<GoalId> {
        assert!(self.goals[leaf.0].is_leaf(), "goal {leaf} already has children");
        assert!(!children.is_empty(), "decomposition must add at least one child");
        let depth = self.goals[leaf.0].depth + 1;
        let mut ids = Vec::with_capacity(children.len());
        for spec in children {
            let id = GoalId(self.goals.len());
            self.goals.push(Goal {
                id,
                description: spec.description,
                check: spec.check,
                children: Vec::new(),
                parent: Some(leaf),
                depth,
                ordered_children: spec.ordered_children,
                atomic: false,
            });
            ids.push(id);
        }
        self.goals[leaf.0].children = ids.clone();
        self.version += 1;
        ids
    }

    pub fn mark_atomic(&mut self, id: GoalId) {
        self.goals[id.0].atomic = true;
    }

    /// Every goal is reachable from the root and each child records its parent.
    pub fn is_well_formed(&self) -> bool {
        let mut seen = vec![false; self.goals.len()];
        let mut stack = vec![self.root_id()];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.0], true) {
                return false;
            }
            for &c in &self.goals[id.0].children {
                if self.goals[c.0].parent != Some(id) {
                    return false;
                }
                stack.push(c);
            }
        }
        seen.into_iter().all(|s| s)
    }
}

impl<C> GoalTree<C> {
    /// Renders the tree as an indented outline.
    pub fn outline(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![self.root_id()];
        while let Some(id) = stack.pop() {
            let g = &self.goals[id.0];
            out.push_str(&"  ".repeat(g.depth));
            out.push_str(&format!("{}: {}\n", g.id, g.description));
            stack.extend(g.children.iter().rev());
        }
        out
    }
}
