//! The scripted plugin: a deterministic mock functional component driven by
//! a scenario script.
//!
//! Time is simulated: the driver calls `advance` once per cycle. A durative
//! activation runs for `duration` advances and then latches its outcome;
//! the latched outcome is delivered — and consumed — by the next `start`.
//! Stopping a running activation discards its outcome; a latch survives a
//! stop, because a completed component has nothing left to stop.

use crate::leaf::{Plugin, PluginError};
use crate::node::{NodeState, Outcome, Response};
use crate::scenario::{Activation, LeafScript};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Idle,
    Running { remaining: u32, outcome: Outcome },
    Latched(Outcome),
}

#[derive(Debug, Clone)]
pub struct ScriptedPlugin {
    activations: Vec<Activation>,
    cycle: bool,
    cursor: usize,
    mode: Mode,
}

impl ScriptedPlugin {
    pub fn new(script: &LeafScript) -> Self {
        ScriptedPlugin {
            activations: script.activations.clone(),
            cycle: script.cycle,
            cursor: 0,
            mode: Mode::Idle,
        }
    }

    fn take_next(&mut self) -> Result<Activation, PluginError> {
        if self.cursor >= self.activations.len() {
            if self.cycle && !self.activations.is_empty() {
                self.cursor = 0;
            } else {
                return Err(PluginError::ScriptExhausted);
            }
        }
        let activation = self.activations[self.cursor];
        self.cursor += 1;
        Ok(activation)
    }
}

impl Plugin for ScriptedPlugin {
    fn start(&mut self) -> Result<Response, PluginError> {
        match self.mode {
            Mode::Latched(outcome) => {
                self.mode = Mode::Idle;
                Ok(outcome.into())
            }
            Mode::Running { .. } => Err(PluginError::StartWhileRunning),
            Mode::Idle => {
                let activation = self.take_next()?;
                if activation.duration == 0 {
                    Ok(activation.outcome.into())
                } else {
                    self.mode =
                        Mode::Running { remaining: activation.duration, outcome: activation.outcome };
                    Ok(Response::Running)
                }
            }
        }
    }

    fn stop(&mut self) {
        if let Mode::Running { .. } = self.mode {
            self.mode = Mode::Idle;
        }
    }

    fn check(&self) -> NodeState {
        match self.mode {
            Mode::Running { .. } => NodeState::Running,
            Mode::Idle | Mode::Latched(_) => NodeState::Idle,
        }
    }

    fn advance(&mut self) {
        if let Mode::Running { remaining, outcome } = self.mode {
            self.mode = if remaining <= 1 {
                Mode::Latched(outcome)
            } else {
                Mode::Running { remaining: remaining - 1, outcome }
            };
        }
    }
}
