//! JSONL trace files: a header line, then one event per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use bes::engine::{TraceEvent, TRACE_SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub config: RunConfig,
}

impl TraceHeader {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            schema_version: TRACE_SCHEMA_VERSION,
            config_hash: config.hash(),
            seed: config.engine.rng_seed,
            config: config.clone(),
        }
    }
}

/// The exact lines written for a run.
pub fn render(header: &TraceHeader, events: &[TraceEvent]) -> Vec<String> {
    let mut lines = Vec::with_capacity(events.len() + 1);
    lines.push(serde_json::to_string(header).expect("header serializes"));
    lines.extend(events.iter().map(|e| serde_json::to_string(e).expect("event serializes")));
    lines
}

pub fn write(path: &Path, lines: &[String]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for line in lines {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[derive(Debug)]
pub struct LoadedTrace {
    pub header: TraceHeader,
    /// Raw event lines, in file order.
    pub lines: Vec<String>,
    pub events: Vec<TraceEvent>,
}

pub fn read(path: &Path) -> Result<LoadedTrace, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut raw = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        raw.push(line.map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    let first = raw.first().ok_or("empty trace file")?;
    let header: TraceHeader = serde_json::from_str(first).map_err(|e| format!("line 1 (header): {e}"))?;
    if header.schema_version != TRACE_SCHEMA_VERSION {
        return Err(format!("unsupported schema version {}", header.schema_version));
    }
    let lines: Vec<String> = raw[1..].to_vec();
    let mut events = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        events.push(serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 2))?);
    }
    Ok(LoadedTrace { header, lines, events })
}
