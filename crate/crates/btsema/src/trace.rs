//! Ordered event log of a simulation run, its JSON Lines encoding, and the
//! diff used for conformance checks.
//!
//! One event per line, stable key order:
//! `{"t":3,"node":"/reactive-sequence#0/action:GoToPoi","ev":"tick_result","v":"RUNNING"}`

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::node::Response;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TickResult,
    Halt,
    PluginStart,
    PluginStop,
    BbRead,
    BbWrite,
    RootResult,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Cycle index.
    pub t: u64,
    /// Path of the node the event is attributed to. Scenario-driven
    /// blackboard writes use the pseudo-path `scenario`.
    pub node: String,
    pub ev: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

#[derive(Debug, Error)]
pub enum TraceReadError {
    #[error("line {line}: {source}")]
    BadLine {
        line: usize,
        source: serde_json::Error,
    },
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("trace event to JSON"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, TraceReadError> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let event = serde_json::from_str(line)
                .map_err(|source| TraceReadError::BadLine { line: i + 1, source })?;
            events.push(event);
        }
        Ok(Trace { events })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// First point where two traces stop agreeing. `None` on either side means
/// that trace ended before the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub index: usize,
    pub left: Option<TraceEvent>,
    pub right: Option<TraceEvent>,
}

impl Divergence {
    pub fn cycle(&self) -> Option<u64> {
        self.left.as_ref().or(self.right.as_ref()).map(|e| e.t)
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycle = self.cycle().unwrap_or(0);
        writeln!(f, "traces diverge at event {} (cycle {})", self.index, cycle)?;
        match &self.left {
            Some(e) => writeln!(f, "  left : {}", serde_json::to_string(e).unwrap())?,
            None => writeln!(f, "  left : <end of trace>")?,
        }
        match &self.right {
            Some(e) => write!(f, "  right: {}", serde_json::to_string(e).unwrap()),
            None => write!(f, "  right: <end of trace>"),
        }
    }
}

/// Compares two traces event by event; `None` means they are identical.
pub fn trace_diff(left: &Trace, right: &Trace) -> Option<Divergence> {
    let n = left.events.len().max(right.events.len());
    for index in 0..n {
        let l = left.events.get(index);
        let r = right.events.get(index);
        if l != r {
            return Some(Divergence {
                index,
                left: l.cloned(),
                right: r.cloned(),
            });
        }
    }
    None
}

/// How much of a run gets recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceVerbosity {
    /// Every event.
    #[default]
    Full,
    /// Only per-cycle root results and errors.
    RootsOnly,
}

/// Accumulates events during a run. The driver owns the cycle counter.
#[derive(Debug)]
pub struct TraceRecorder {
    events: Vec<TraceEvent>,
    t: u64,
    verbosity: TraceVerbosity,
}

impl TraceRecorder {
    pub fn new(verbosity: TraceVerbosity) -> Self {
        TraceRecorder { events: Vec::new(), t: 0, verbosity }
    }

    pub fn begin_cycle(&mut self, t: u64) {
        self.t = t;
    }

    fn push(&mut self, node: &str, ev: EventKind, v: Option<String>) {
        if self.verbosity == TraceVerbosity::RootsOnly
            && !matches!(ev, EventKind::RootResult | EventKind::Error)
        {
            return;
        }
        self.events.push(TraceEvent { t: self.t, node: node.to_owned(), ev, v });
    }

    pub fn tick_result(&mut self, node: &str, response: Response) {
        self.push(node, EventKind::TickResult, Some(response.to_string()));
    }

    pub fn halt(&mut self, node: &str) {
        self.push(node, EventKind::Halt, None);
    }

    pub fn plugin_start(&mut self, node: &str, response: Response) {
        self.push(node, EventKind::PluginStart, Some(response.to_string()));
    }

    pub fn plugin_stop(&mut self, node: &str) {
        self.push(node, EventKind::PluginStop, None);
    }

    pub fn bb_read(&mut self, node: &str, key: &str, value: &Value) {
        self.push(node, EventKind::BbRead, Some(format!("{key}={value}")));
    }

    pub fn bb_write(&mut self, node: &str, key: &str, value: &Value) {
        self.push(node, EventKind::BbWrite, Some(format!("{key}={value}")));
    }

    pub fn root_result(&mut self, node: &str, response: Response) {
        self.push(node, EventKind::RootResult, Some(response.to_string()));
    }

    pub fn error(&mut self, node: &str, message: &str) {
        self.push(node, EventKind::Error, Some(message.to_owned()));
    }

    pub fn finish(self) -> Trace {
        Trace { events: self.events }
    }
}
