use serde::{Deserialize, Serialize};

use crate::forward::Draws;
use crate::pool::{EntryId, OperatorTag};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Forward,
    Decompose,
    Rescore,
    Terminal,
    PadRollout,
}

/// One line of the run trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: usize,
    pub kind: EventKind,
    pub operator_tag: Option<OperatorTag>,
    pub parent_ids: Vec<EntryId>,
    pub child_id: Option<EntryId>,
    pub child_score: Option<f64>,
    pub tau: Option<f64>,
    /// Policy calls spent by this event alone.
    pub policy_calls: usize,
    pub policy_calls_cumulative: usize,
    pub verifier_calls_cumulative: usize,
    pub tree_version: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<Draws>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_micros: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TraceEvent {
    pub(crate) fn new(step: usize, kind: EventKind) -> Self {
        Self {
            step,
            kind,
            operator_tag: None,
            parent_ids: Vec::new(),
            child_id: None,
            child_score: None,
            tau: None,
            policy_calls: 0,
            policy_calls_cumulative: 0,
            verifier_calls_cumulative: 0,
            tree_version: 0,
            draws: None,
            wall_micros: None,
            note: None,
        }
    }

    /// The event with the wall-clock stamp removed, for replay comparison.
    pub fn without_wall_time(&self) -> Self {
        Self { wall_micros: None, ..self.clone() }
    }
}

/// Checks ordering and call accounting: steps never decrease, cumulative
/// calls never decrease, and every increment is the event's own
/// `policy_calls` on an expansion or padding event.
pub fn reconcile(events: &[TraceEvent]) -> Result<usize, String> {
    let mut step = 0;
    let mut calls = 0;
    for (i, e) in events.iter().enumerate() {
        if e.step < step {
            return Err(format!("event {i}: step {} after step {step}", e.step));
        }
        step = e.step;
        if e.policy_calls > 0 {
            let attributable = matches!(e.kind, EventKind::PadRollout)
                || (e.kind == EventKind::Forward && e.operator_tag == Some(OperatorTag::Expand));
            if !attributable {
                return Err(format!("event {i}: {:?} event spent policy calls", e.kind));
            }
        }
        if e.policy_calls_cumulative != calls + e.policy_calls {
            return Err(format!(
                "event {i}: cumulative {} != {} + {}",
                e.policy_calls_cumulative, calls, e.policy_calls
            ));
        }
        calls = e.policy_calls_cumulative;
    }
    Ok(calls)
}
