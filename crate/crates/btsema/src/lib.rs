//! Behavior tree runtime with explicit tick/halt semantics, plus everything
//! needed to check an implementation against a reference: a tree DSL, a
//! deterministic scripted simulation harness, an independent oracle
//! interpreter, trace recording/diffing, and invariant checkers.
//!
//! The execution model: a tree of control-flow nodes (reactive and
//! with-memory sequence/fallback/parallel, switch), decorators (inverter,
//! force, retry-until) and execution leaves (action, condition) shares one
//! blackboard. Each cycle the root receives a tick and answers SUCCESS,
//! FAILURE, or RUNNING; an out-of-band halt recursively idles a subtree and
//! stops the components behind its leaves. Leaves drive their functional
//! component through a three-method plugin interface; the harness supplies
//! scripted plugins so whole runs are deterministic and comparable
//! event-for-event.

pub mod ast;
pub mod blackboard;
pub mod conformance;
pub mod control;
pub mod corpus;
pub mod decorator;
pub mod dot;
pub mod leaf;
pub mod node;
pub mod oracle;
pub mod parse;
pub mod print;
pub mod scenario;
pub mod script;
pub mod sim;
pub mod trace;
pub mod validate;
pub mod value;

#[cfg(test)]
pub(crate) mod testutil;

pub use ast::{AttrValue, BuildError, ControlSpecBuilder, Pos, SpecKind, SpecNode};
pub use blackboard::{Blackboard, MissingKeyError};
pub use conformance::{check_run, CycleSnapshot, InvariantViolation};
pub use corpus::{generate_case, CorpusParams, GeneratedCase};
pub use dot::export_dot;
pub use leaf::{Plugin, PluginError};
pub use node::{NodeState, Outcome, Response, RuntimeError, TickCtx, TreeNode};
pub use oracle::{oracle_run, oracle_run_with_fault, SeededFault, ALL_FAULTS};
pub use parse::{parse_tree, ParseError, ParseErrorKind};
pub use print::print_tree;
pub use scenario::{
    parse_scenario, Activation, CrossCheckError, LeafScript, ScenarioError, ScenarioSpec,
    ScheduledUpdate,
};
pub use script::ScriptedPlugin;
pub use sim::{
    run_simulation, run_simulation_observed, RunConfig, RunOutcome, RunReport, ScenarioMismatch,
    SCENARIO_NODE,
};
pub use trace::{
    trace_diff, Divergence, EventKind, Trace, TraceEvent, TraceRecorder, TraceVerbosity,
};
pub use validate::{LeafDecl, LeafKind, PluginFactory, PluginSetupError, ValidationError, WellFormedTree};
pub use value::Value;
