use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::trajectory::Trajectory;

/// Monotone pool identifier. Ids are dense: entry `n` lives at index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntryId(pub usize);

impl fmt::Display for EntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// How an entry came into the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorTag {
    Root,
    Expand,
    Combine,
    Delete,
    Translocate,
    Crossover,
}

impl OperatorTag {
    pub fn parent_count(self) -> usize {
        match self {
            OperatorTag::Root => 0,
            OperatorTag::Expand | OperatorTag::Delete => 1,
            OperatorTag::Combine | OperatorTag::Translocate | OperatorTag::Crossover => 2,
        }
    }
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            OperatorTag::Root => "root",
            OperatorTag::Expand => "expand",
            OperatorTag::Combine => "combine",
            OperatorTag::Delete => "delete",
            OperatorTag::Translocate => "translocate",
            OperatorTag::Crossover => "crossover",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoolEntry<S> {
    pub id: EntryId,
    pub trajectory: Trajectory<S>,
    /// Selection score under the current goal tree (recursive or bucketed).
    pub score: f64,
    /// Recursive backward score against the root goal.
    pub backward: f64,
    /// Root verifier value, present for terminal entries.
    pub terminal_value: Option<f64>,
    /// Goal-tree version the scores were computed under.
    pub score_version: u64,
    pub degree: usize,
    pub parent_ids: Vec<EntryId>,
    pub birth_step: usize,
    pub operator_tag: OperatorTag,
    /// First entry with the same step sequence, when this one is a repeat.
    pub duplicate_of: Option<EntryId>,
}

impl<S> PoolEntry<S> {
    pub fn is_terminal(&self) -> bool {
        self.trajectory.terminal
    }
}

/// Scores attached to an entry at insertion or re-scoring time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryScores {
    pub score: f64,
    pub backward: f64,
    pub terminal_value: Option<f64>,
    pub version: u64,
}

/// Append-only candidate pool. Entries are immutable apart from scores and
/// degree.
#[derive(Debug, Clone)]
pub struct CandidatePool<S> {
    entries: Vec<PoolEntry<S>>,
    first_seen: HashMap<Vec<S>, EntryId>,
}

impl<S: Clone + Eq + Hash> CandidatePool<S> {
    pub fn new() -> Self {
        Self { entries: Vec::new(), first_seen: HashMap::new() }
    }

    pub fn insert(
        &mut self,
        trajectory: Trajectory<S>,
        parent_ids: Vec<EntryId>,
        birth_step: usize,
        operator_tag: OperatorTag,
        scores: EntryScores,
    ) -> EntryId {
        let id = EntryId(self.entries.len());
        for parent in &parent_ids {
            self.entries[parent.0].degree += 1;
        }
        let duplicate_of = match self.first_seen.get(&trajectory.steps) {
            Some(&first) => Some(first),
            None => {
                self.first_seen.insert(trajectory.steps.clone(), id);
                None
            }
        };
        self.entries.push(PoolEntry {
            id,
            trajectory,
            score: scores.score,
            backward: scores.backward,
            terminal_value: scores.terminal_value,
            score_version: scores.version,
            degree: 0,
            parent_ids,
            birth_step,
            operator_tag,
            duplicate_of,
        });
        id
    }
}

impl<S: Clone + Eq + Hash> Default for CandidatePool<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S> CandidatePool<S> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: EntryId) -> &PoolEntry<S> {
        &self.entries[id.0]
    }

    pub fn entries(&self) -> &[PoolEntry<S>] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &PoolEntry<S>> {
        self.entries.iter()
    }

    pub fn set_scores(&mut self, id: EntryId, scores: EntryScores) {
        let e = &mut self.entries[id.0];
        e.score = scores.score;
        e.backward = scores.backward;
        e.terminal_value = scores.terminal_value;
        e.score_version = scores.version;
    }

    /// Recounts every entry's degree from the lineage lists.
    pub fn recount_degrees(&self) -> Vec<usize> {
        let mut counts = vec![0; self.entries.len()];
        for e in &self.entries {
            for p in &e.parent_ids {
                counts[p.0] += 1;
            }
        }
        counts
    }

    pub fn degrees_consistent(&self) -> bool {
        self.recount_degrees().iter().zip(&self.entries).all(|(&c, e)| c == e.degree)
    }
}
