//! Core vocabulary of the execution semantics: tick responses, node states,
//! the runtime tree, and the errors a tick can raise.
//!
//! Ticking and halting are blocking, single-threaded operations: a call runs
//! the whole subtree to completion before returning, and nothing here is
//! re-entrant. A tree may move between threads only between complete cycles.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blackboard::Blackboard;
use crate::control::{
    FallbackWithMemory, ParallelWithMemory, ReactiveFallback, ReactiveParallel, ReactiveSequence,
    SequenceWithMemory, Switch,
};
use crate::decorator::{Force, Inverter, RetryUntil};
use crate::leaf::{ActionNode, ConditionNode};
use crate::trace::TraceRecorder;
use crate::value::Value;

/// Result of one tick: the only three things a node can answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Response {
    Success,
    Failure,
    Running,
}

impl Response {
    pub fn is_terminal(self) -> bool {
        self != Response::Running
    }
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Response::Success => "SUCCESS",
            Response::Failure => "FAILURE",
            Response::Running => "RUNNING",
        })
    }
}

/// Queryable status of a node, coupled to the response of its last tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeState {
    Idle,
    Running,
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeState::Idle => "IDLE",
            NodeState::Running => "RUNNING",
        })
    }
}

/// A terminal response. Used where RUNNING is not allowed: forced results,
/// retry targets, and scripted activation outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Success,
    Failure,
}

impl From<Outcome> for Response {
    fn from(o: Outcome) -> Response {
        match o {
            Outcome::Success => Response::Success,
            Outcome::Failure => Response::Failure,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Success => "SUCCESS",
            Outcome::Failure => "FAILURE",
        })
    }
}

/// Error raised while ticking; aborts the current root tick. The path names
/// the node at fault.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("{path}: blackboard key '{key}' is missing")]
    MissingKey { path: String, key: String },
    #[error("{path}: blackboard key '{key}' holds {found}, expected an integer")]
    KeyNotInt { path: String, key: String, found: Value },
    #[error("{path}: key '{key}' routes to child {index} but there are {len} children")]
    RouteOutOfRange { path: String, key: String, index: i64, len: usize },
    #[error("{path}: condition plugin returned RUNNING")]
    ConditionReturnedRunning { path: String },
    #[error("{path}: script exhausted and not cyclic")]
    ScriptExhausted { path: String },
    #[error("{path}: plugin started while already running")]
    StartWhileRunning { path: String },
}

impl RuntimeError {
    pub fn path(&self) -> &str {
        match self {
            RuntimeError::MissingKey { path, .. }
            | RuntimeError::KeyNotInt { path, .. }
            | RuntimeError::RouteOutOfRange { path, .. }
            | RuntimeError::ConditionReturnedRunning { path }
            | RuntimeError::ScriptExhausted { path }
            | RuntimeError::StartWhileRunning { path } => path,
        }
    }
}

/// Everything a node may touch while ticking: the shared blackboard and the
/// event recorder.
pub struct TickCtx<'a> {
    pub blackboard: &'a mut Blackboard,
    pub trace: &'a mut TraceRecorder,
}

/// Per-node bookkeeping shared by every kind: its trace path and its state.
#[derive(Debug)]
pub(crate) struct NodeMeta {
    pub(crate) path: String,
    pub(crate) state: NodeState,
}

#[derive(Debug)]
pub(crate) enum NodeBody {
    Action(ActionNode),
    Condition(ConditionNode),
    ReactiveSequence(ReactiveSequence),
    ReactiveFallback(ReactiveFallback),
    ReactiveParallel(ReactiveParallel),
    SequenceWithMemory(SequenceWithMemory),
    FallbackWithMemory(FallbackWithMemory),
    ParallelWithMemory(ParallelWithMemory),
    Switch(Switch),
    Inverter(Inverter),
    Force(Force),
    RetryUntil(RetryUntil),
}

/// One runtime node of a validated tree. Constructed in IDLE.
#[derive(Debug)]
pub struct TreeNode {
    pub(crate) meta: NodeMeta,
    pub(crate) body: NodeBody,
}

impl TreeNode {
    pub(crate) fn new(path: String, body: NodeBody) -> TreeNode {
        TreeNode { meta: NodeMeta { path, state: NodeState::Idle }, body }
    }

    /// Ticks this node, recording child activity and the node's own result.
    /// On error the cycle is aborted: no result event is recorded for this
    /// node or its ancestors.
    pub fn tick(&mut self, ctx: &mut TickCtx<'_>) -> Result<Response, RuntimeError> {
        let response = match &mut self.body {
            NodeBody::Action(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::Condition(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::ReactiveSequence(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::ReactiveFallback(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::ReactiveParallel(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::SequenceWithMemory(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::FallbackWithMemory(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::ParallelWithMemory(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::Switch(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::Inverter(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::Force(n) => n.tick(&mut self.meta, ctx)?,
            NodeBody::RetryUntil(n) => n.tick(&mut self.meta, ctx)?,
        };
        ctx.trace.tick_result(&self.meta.path, response);
        debug_assert_eq!(
            self.meta.state == NodeState::Running,
            response == Response::Running,
            "state/response coupling broken at {}",
            self.meta.path,
        );
        Ok(response)
    }

    /// Stops this node and its subtree. Always leaves every node IDLE.
    pub fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        ctx.trace.halt(&self.meta.path);
        match &mut self.body {
            NodeBody::Action(n) => n.halt(&self.meta, ctx),
            NodeBody::Condition(_) => {}
            NodeBody::ReactiveSequence(n) => n.halt(ctx),
            NodeBody::ReactiveFallback(n) => n.halt(ctx),
            NodeBody::ReactiveParallel(n) => n.halt(ctx),
            NodeBody::SequenceWithMemory(n) => n.halt(ctx),
            NodeBody::FallbackWithMemory(n) => n.halt(ctx),
            NodeBody::ParallelWithMemory(n) => n.halt(ctx),
            NodeBody::Switch(n) => n.halt(ctx),
            NodeBody::Inverter(n) => n.halt(ctx),
            NodeBody::Force(n) => n.halt(ctx),
            NodeBody::RetryUntil(n) => n.halt(ctx),
        }
        self.meta.state = NodeState::Idle;
    }

    pub fn state(&self) -> NodeState {
        self.meta.state
    }

    pub fn path(&self) -> &str {
        &self.meta.path
    }

    /// The declared name for leaves, `None` for inner nodes.
    pub fn leaf_name(&self) -> Option<&str> {
        match &self.body {
            NodeBody::Action(n) => Some(n.name()),
            NodeBody::Condition(n) => Some(n.name()),
            _ => None,
        }
    }

    pub fn kind_keyword(&self) -> &'static str {
        match &self.body {
            NodeBody::Action(_) => "action",
            NodeBody::Condition(_) => "condition",
            NodeBody::ReactiveSequence(_) => "reactive-sequence",
            NodeBody::ReactiveFallback(_) => "reactive-fallback",
            NodeBody::ReactiveParallel(_) => "reactive-parallel",
            NodeBody::SequenceWithMemory(_) => "sequence-with-memory",
            NodeBody::FallbackWithMemory(_) => "fallback-with-memory",
            NodeBody::ParallelWithMemory(_) => "parallel-with-memory",
            NodeBody::Switch(_) => "switch",
            NodeBody::Inverter(_) => "inverter",
            NodeBody::Force(_) => "force",
            NodeBody::RetryUntil(_) => "retry-until",
        }
    }

    pub fn children(&self) -> &[TreeNode] {
        match &self.body {
            NodeBody::Action(_) | NodeBody::Condition(_) => &[],
            NodeBody::ReactiveSequence(n) => &n.children,
            NodeBody::ReactiveFallback(n) => &n.children,
            NodeBody::ReactiveParallel(n) => &n.children,
            NodeBody::SequenceWithMemory(n) => &n.children,
            NodeBody::FallbackWithMemory(n) => &n.children,
            NodeBody::ParallelWithMemory(n) => &n.children,
            NodeBody::Switch(n) => &n.children,
            NodeBody::Inverter(n) => std::slice::from_ref(&n.child),
            NodeBody::Force(n) => std::slice::from_ref(&n.child),
            NodeBody::RetryUntil(n) => std::slice::from_ref(&n.child),
        }
    }

    fn children_mut(&mut self) -> &mut [TreeNode] {
        match &mut self.body {
            NodeBody::Action(_) | NodeBody::Condition(_) => &mut [],
            NodeBody::ReactiveSequence(n) => &mut n.children,
            NodeBody::ReactiveFallback(n) => &mut n.children,
            NodeBody::ReactiveParallel(n) => &mut n.children,
            NodeBody::SequenceWithMemory(n) => &mut n.children,
            NodeBody::FallbackWithMemory(n) => &mut n.children,
            NodeBody::ParallelWithMemory(n) => &mut n.children,
            NodeBody::Switch(n) => &mut n.children,
            NodeBody::Inverter(n) => std::slice::from_mut(&mut n.child),
            NodeBody::Force(n) => std::slice::from_mut(&mut n.child),
            NodeBody::RetryUntil(n) => std::slice::from_mut(&mut n.child),
        }
    }

    /// Pre-order walk over this node and its descendants.
    pub fn visit(&self, f: &mut dyn FnMut(&TreeNode)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    /// Collects `(path, state)` for the whole subtree in pre-order.
    pub fn snapshot_states(&self) -> Vec<(String, NodeState)> {
        let mut out = Vec::new();
        self.visit(&mut |n| out.push((n.path().to_owned(), n.state())));
        out
    }

    /// Paths of idle nodes whose memory is not reset. Idle memory nodes must
    /// look freshly constructed: cursor zero, counters zero, no completion
    /// flags.
    pub fn idle_memory_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if n.state() != NodeState::Idle {
                return;
            }
            let dirty = match &n.body {
                NodeBody::SequenceWithMemory(b) => b.cursor != 0,
                NodeBody::FallbackWithMemory(b) => b.cursor != 0,
                NodeBody::ParallelWithMemory(b) => {
                    b.successes != 0 || b.failures != 0 || b.completed.iter().any(|&d| d)
                }
                _ => false,
            };
            if dirty {
                out.push(n.path().to_owned());
            }
        });
        out
    }

    /// Moves simulated time forward by one cycle for every plugin under this
    /// node. Called once per driver cycle, before the root tick.
    pub fn advance_plugins(&mut self) {
        match &mut self.body {
            NodeBody::Action(n) => n.plugin.advance(),
            NodeBody::Condition(n) => n.plugin.advance(),
            _ => {
                for child in self.children_mut() {
                    child.advance_plugins();
                }
            }
        }
    }
}
