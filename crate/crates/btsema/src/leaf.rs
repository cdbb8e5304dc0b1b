//! Execution leaves: actions and conditions, driven through a three-method
//! plugin interface.
//!
//! The tick/halt skeletons are fixed; everything leaf-specific lives behind
//! [`Plugin`]. An action may be durative; a condition is an instantaneous
//! check whose plugin must answer with a terminal response.

use thiserror::Error;

use crate::node::{NodeMeta, NodeState, Response, RuntimeError, TickCtx};

/// The extension point for functional components behind a leaf.
///
/// `start` begins (or synchronously performs) the component's work and says
/// how it went so far. `stop` cancels a started component and does not return
/// until stopping is complete; stopping an idle component has no effect.
/// `check` reports whether the component is mid-execution.
pub trait Plugin {
    fn start(&mut self) -> Result<Response, PluginError>;
    fn stop(&mut self);
    fn check(&self) -> NodeState;

    /// One step of simulated time. Real integrations, which live on real
    /// time, keep the default no-op.
    fn advance(&mut self) {}
}

impl std::fmt::Debug for dyn Plugin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Plugin(check={})", self.check())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PluginError {
    #[error("script exhausted and not cyclic")]
    ScriptExhausted,
    #[error("started while already running")]
    StartWhileRunning,
}

impl PluginError {
    fn at(self, path: &str) -> RuntimeError {
        let path = path.to_owned();
        match self {
            PluginError::ScriptExhausted => RuntimeError::ScriptExhausted { path },
            PluginError::StartWhileRunning => RuntimeError::StartWhileRunning { path },
        }
    }
}

/// A possibly durative leaf.
#[derive(Debug)]
pub struct ActionNode {
    pub(crate) name: String,
    pub(crate) plugin: Box<dyn Plugin>,
}

impl ActionNode {
    pub(crate) fn new(name: String, plugin: Box<dyn Plugin>) -> Self {
        ActionNode { name, plugin }
    }

    pub(crate) fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        if self.plugin.check() == NodeState::Idle {
            let response = self.plugin.start().map_err(|e| e.at(&meta.path))?;
            ctx.trace.plugin_start(&meta.path, response);
            if response == Response::Running {
                meta.state = NodeState::Running;
                Ok(Response::Running)
            } else {
                self.plugin.stop();
                ctx.trace.plugin_stop(&meta.path);
                meta.state = NodeState::Idle;
                Ok(response)
            }
        } else {
            // Already started on an earlier tick; nothing to do but wait.
            Ok(Response::Running)
        }
    }

    pub(crate) fn halt(&mut self, meta: &NodeMeta, ctx: &mut TickCtx<'_>) {
        if self.plugin.check() != NodeState::Idle {
            self.plugin.stop();
            ctx.trace.plugin_stop(&meta.path);
        }
    }
}

/// An instantaneous check. Never RUNNING, never leaves IDLE, and halting it
/// has no effect.
#[derive(Debug)]
pub struct ConditionNode {
    pub(crate) name: String,
    pub(crate) plugin: Box<dyn Plugin>,
}

impl ConditionNode {
    pub(crate) fn new(name: String, plugin: Box<dyn Plugin>) -> Self {
        ConditionNode { name, plugin }
    }

    pub(crate) fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        let response = self.plugin.start().map_err(|e| e.at(&meta.path))?;
        ctx.trace.plugin_start(&meta.path, response);
        if response == Response::Running {
            return Err(RuntimeError::ConditionReturnedRunning { path: meta.path.clone() });
        }
        Ok(response)
    }
}
