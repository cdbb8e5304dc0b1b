//! Control flow nodes: sequence, fallback and parallel in reactive and
//! with-memory variants, plus the blackboard-routed switch.
//!
//! Reactive variants re-evaluate every child from the first on each tick;
//! with-memory variants resume from a stored cursor or completion flags.
//! All of them tick children strictly in array order.

use crate::node::{NodeMeta, NodeState, Response, RuntimeError, TickCtx};
use crate::node::TreeNode;

/// Halts every non-idle node of `children[start..]`, in ascending order.
fn halt_from(children: &mut [TreeNode], start: usize, ctx: &mut TickCtx<'_>) {
    for child in &mut children[start..] {
        if child.state() != NodeState::Idle {
            child.halt(ctx);
        }
    }
}

/// Ticks children from the first; fails or keeps running on the first child
/// that does not succeed, halting any later child still active.
#[derive(Debug)]
pub struct ReactiveSequence {
    pub(crate) children: Vec<TreeNode>,
}

impl ReactiveSequence {
    pub(crate) fn new(children: Vec<TreeNode>) -> Self {
        ReactiveSequence { children }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        for i in 0..self.children.len() {
            let response = self.children[i].tick(ctx)?;
            if response != Response::Success {
                halt_from(&mut self.children, i + 1, ctx);
                meta.state = if response == Response::Running {
                    NodeState::Running
                } else {
                    NodeState::Idle
                };
                return Ok(response);
            }
        }
        meta.state = NodeState::Idle;
        Ok(Response::Success)
    }

    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_from(&mut self.children, 0, ctx);
    }
}

/// Dual of [`ReactiveSequence`]: succeeds or keeps running on the first child
/// that does not fail.
#[derive(Debug)]
pub struct ReactiveFallback {
    pub(crate) children: Vec<TreeNode>,
}

impl ReactiveFallback {
    pub(crate) fn new(children: Vec<TreeNode>) -> Self {
        ReactiveFallback { children }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        for i in 0..self.children.len() {
            let response = self.children[i].tick(ctx)?;
            if response != Response::Failure {
                halt_from(&mut self.children, i + 1, ctx);
                meta.state = if response == Response::Running {
                    NodeState::Running
                } else {
                    NodeState::Idle
                };
                return Ok(response);
            }
        }
        meta.state = NodeState::Idle;
        Ok(Response::Failure)
    }

    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_from(&mut self.children, 0, ctx);
    }
}

/// Ticks every child each cycle and compares the per-cycle counts against
/// the success threshold. Succeeds once `k` children succeed this cycle,
/// fails once success is out of reach (`failures > n - k`), and halts itself
/// on either terminal so the whole subtree ends up idle.
#[derive(Debug)]
pub struct ReactiveParallel {
    pub(crate) threshold: usize,
    pub(crate) children: Vec<TreeNode>,
}

impl ReactiveParallel {
    pub(crate) fn new(threshold: usize, children: Vec<TreeNode>) -> Self {
        ReactiveParallel { threshold, children }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        let mut successes = 0usize;
        let mut failures = 0usize;
        for child in &mut self.children {
            match child.tick(ctx)? {
                Response::Success => successes += 1,
                Response::Failure => failures += 1,
                Response::Running => {}
            }
        }
        let n = self.children.len();
        debug_assert!(
            !(successes >= self.threshold && failures > n - self.threshold),
            "both parallel thresholds met at {}",
            meta.path,
        );
        if successes >= self.threshold {
            self.halt_self(meta, ctx);
            Ok(Response::Success)
        } else if failures > n - self.threshold {
            self.halt_self(meta, ctx);
            Ok(Response::Failure)
        } else {
            meta.state = NodeState::Running;
            Ok(Response::Running)
        }
    }

    // Terminal returns go through the same halt as an external one.
    fn halt_self(&mut self, meta: &mut NodeMeta, ctx: &mut TickCtx<'_>) {
        ctx.trace.halt(&meta.path);
        self.halt(ctx);
        meta.state = NodeState::Idle;
    }

    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_from(&mut self.children, 0, ctx);
    }
}

/// Sequence that resumes from the child seen running last cycle instead of
/// re-ticking earlier children.
#[derive(Debug)]
pub struct SequenceWithMemory {
    pub(crate) cursor: usize,
    pub(crate) children: Vec<TreeNode>,
}

impl SequenceWithMemory {
    pub(crate) fn new(children: Vec<TreeNode>) -> Self {
        SequenceWithMemory { cursor: 0, children }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        for j in self.cursor..self.children.len() {
            match self.children[j].tick(ctx)? {
                Response::Running => {
                    self.cursor = j;
                    meta.state = NodeState::Running;
                    return Ok(Response::Running);
                }
                Response::Failure => {
                    self.cursor = 0;
                    meta.state = NodeState::Idle;
                    return Ok(Response::Failure);
                }
                Response::Success => {}
            }
        }
        self.cursor = 0;
        meta.state = NodeState::Idle;
        Ok(Response::Success)
    }

    // Resets the cursor: an idle node always restarts from its first child.
    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_from(&mut self.children, 0, ctx);
        self.cursor = 0;
    }
}

/// Dual of [`SequenceWithMemory`].
#[derive(Debug)]
pub struct FallbackWithMemory {
    pub(crate) cursor: usize,
    pub(crate) children: Vec<TreeNode>,
}

impl FallbackWithMemory {
    pub(crate) fn new(children: Vec<TreeNode>) -> Self {
        FallbackWithMemory { cursor: 0, children }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        for j in self.cursor..self.children.len() {
            match self.children[j].tick(ctx)? {
                Response::Running => {
                    self.cursor = j;
                    meta.state = NodeState::Running;
                    return Ok(Response::Running);
                }
                Response::Success => {
                    self.cursor = 0;
                    meta.state = NodeState::Idle;
                    return Ok(Response::Success);
                }
                Response::Failure => {}
            }
        }
        self.cursor = 0;
        meta.state = NodeState::Idle;
        Ok(Response::Failure)
    }

    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_from(&mut self.children, 0, ctx);
        self.cursor = 0;
    }
}

/// Parallel that remembers completed children between cycles: a child that
/// answered a terminal is not re-ticked until the node itself finishes or is
/// halted. All still-pending children are ticked before the thresholds are
/// checked.
#[derive(Debug)]
pub struct ParallelWithMemory {
    pub(crate) threshold: usize,
    pub(crate) successes: usize,
    pub(crate) failures: usize,
    pub(crate) completed: Vec<bool>,
    pub(crate) children: Vec<TreeNode>,
}

impl ParallelWithMemory {
    pub(crate) fn new(threshold: usize, children: Vec<TreeNode>) -> Self {
        let completed = vec![false; children.len()];
        ParallelWithMemory { threshold, successes: 0, failures: 0, completed, children }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        for i in 0..self.children.len() {
            if !self.completed[i] {
                let response = self.children[i].tick(ctx)?;
                if response != Response::Running {
                    self.completed[i] = true;
                    match response {
                        Response::Success => self.successes += 1,
                        Response::Failure => self.failures += 1,
                        Response::Running => unreachable!(),
                    }
                }
            }
        }
        let n = self.children.len();
        debug_assert!(
            !(self.successes >= self.threshold && self.failures > n - self.threshold),
            "both parallel thresholds met at {}",
            meta.path,
        );
        if self.successes >= self.threshold {
            self.halt_self(meta, ctx);
            Ok(Response::Success)
        } else if self.failures > n - self.threshold {
            self.halt_self(meta, ctx);
            Ok(Response::Failure)
        } else {
            meta.state = NodeState::Running;
            Ok(Response::Running)
        }
    }

    fn halt_self(&mut self, meta: &mut NodeMeta, ctx: &mut TickCtx<'_>) {
        ctx.trace.halt(&meta.path);
        self.halt(ctx);
        meta.state = NodeState::Idle;
    }

    /// Halting also wipes the counters and completion flags.
    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_from(&mut self.children, 0, ctx);
        self.successes = 0;
        self.failures = 0;
        self.completed.fill(false);
    }
}

/// Routes the tick to the child whose index the blackboard holds under
/// `route_key`. When the route changes while the old child is still active,
/// the old child is halted before the new one is ticked.
#[derive(Debug)]
pub struct Switch {
    pub(crate) route_key: String,
    pub(crate) last_routed: Option<usize>,
    pub(crate) children: Vec<TreeNode>,
}

impl Switch {
    pub(crate) fn new(route_key: String, children: Vec<TreeNode>) -> Self {
        Switch { route_key, last_routed: None, children }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        let value = ctx.blackboard.lookup(&self.route_key).map_err(|e| {
            RuntimeError::MissingKey { path: meta.path.clone(), key: e.key }
        })?;
        let index = value.as_int().ok_or_else(|| RuntimeError::KeyNotInt {
            path: meta.path.clone(),
            key: self.route_key.clone(),
            found: value.clone(),
        })?;
        if index < 0 || index as usize >= self.children.len() {
            return Err(RuntimeError::RouteOutOfRange {
                path: meta.path.clone(),
                key: self.route_key.clone(),
                index,
                len: self.children.len(),
            });
        }
        let value = value.clone();
        ctx.trace.bb_read(&meta.path, &self.route_key, &value);
        let next = index as usize;
        if self.last_routed != Some(next) {
            if let Some(previous) = self.last_routed {
                if self.children[previous].state() != NodeState::Idle {
                    self.children[previous].halt(ctx);
                }
            }
            self.last_routed = Some(next);
        }
        let response = self.children[next].tick(ctx)?;
        if response == Response::Running {
            meta.state = NodeState::Running;
            Ok(Response::Running)
        } else {
            meta.state = NodeState::Idle;
            self.last_routed = None;
            Ok(response)
        }
    }

    // No memory reset: a stale route index is harmless because the halted
    // child is already idle.
    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_from(&mut self.children, 0, ctx);
    }
}
