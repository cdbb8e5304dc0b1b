//! Shared helpers for driving small trees in unit tests.

use std::collections::BTreeMap;

use crate::ast::SpecNode;
use crate::blackboard::Blackboard;
use crate::conformance::CycleSnapshot;
use crate::node::{Outcome, Response, TickCtx, TreeNode};
use crate::scenario::{Activation, LeafScript, ScenarioSpec};
use crate::script::ScriptedPlugin;
use crate::sim::{run_simulation_observed, RunConfig, RunReport};
use crate::trace::{EventKind, Trace, TraceEvent, TraceRecorder, TraceVerbosity};
use crate::validate::WellFormedTree;
use crate::value::Value;

pub(crate) fn script(activations: &[(u32, Outcome)]) -> LeafScript {
    LeafScript {
        activations: activations
            .iter()
            .map(|&(duration, outcome)| Activation { duration, outcome })
            .collect(),
        cycle: true,
    }
}

pub(crate) fn scenario(
    leaves: &[(&str, &[(u32, Outcome)])],
    blackboard: &[(&str, Value)],
    max_ticks: u64,
) -> ScenarioSpec {
    ScenarioSpec {
        blackboard: blackboard.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        updates: vec![],
        leaves: leaves
            .iter()
            .map(|(name, activations)| (name.to_string(), script(activations)))
            .collect::<BTreeMap<_, _>>(),
        max_ticks,
    }
}

/// Runs with default config and captures per-cycle snapshots.
pub(crate) fn run(tree: SpecNode, scenario: &ScenarioSpec) -> (RunReport, Vec<CycleSnapshot>) {
    let tree = WellFormedTree::validate(tree).expect("test tree is well formed");
    let mut snapshots = Vec::new();
    let report = run_simulation_observed(
        &tree,
        scenario,
        &RunConfig::for_scenario(scenario),
        &mut |t, root| {
            assert_eq!(root.idle_memory_violations(), Vec::<String>::new());
            snapshots.push(CycleSnapshot { t, states: root.snapshot_states() });
        },
    )
    .expect("scenario fits tree");
    (report, snapshots)
}

pub(crate) fn root_results(report: &RunReport) -> Vec<String> {
    report
        .trace
        .events
        .iter()
        .filter(|e| e.ev == EventKind::RootResult)
        .map(|e| e.v.clone().unwrap())
        .collect()
}

pub(crate) fn tick_results_of(trace: &Trace, path: &str) -> Vec<(u64, String)> {
    trace
        .events
        .iter()
        .filter(|e| e.ev == EventKind::TickResult && e.node == path)
        .map(|e| (e.t, e.v.clone().unwrap()))
        .collect()
}

pub(crate) fn events_at(trace: &Trace, t: u64) -> Vec<&TraceEvent> {
    trace.events.iter().filter(|e| e.t == t).collect()
}

pub(crate) fn halted_at(trace: &Trace, t: u64) -> Vec<String> {
    trace
        .events
        .iter()
        .filter(|e| e.t == t && e.ev == EventKind::Halt)
        .map(|e| e.node.clone())
        .collect()
}

/// Hand-driven tree for tests that tick and halt out of band.
pub(crate) struct Manual {
    pub root: TreeNode,
    blackboard: Blackboard,
    recorder: TraceRecorder,
}

impl Manual {
    pub(crate) fn new(tree: SpecNode, scenario: &ScenarioSpec) -> Manual {
        let tree = WellFormedTree::validate(tree).expect("test tree is well formed");
        let root = tree
            .instantiate(&mut |decl| match scenario.leaves.get(decl.name) {
                Some(script) => Ok(Box::new(ScriptedPlugin::new(script))),
                None => Err(format!("no script for '{}'", decl.name)),
            })
            .unwrap();
        Manual {
            root,
            blackboard: scenario.blackboard.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            recorder: TraceRecorder::new(TraceVerbosity::Full),
        }
    }

    pub(crate) fn tick(&mut self) -> Response {
        let mut ctx =
            TickCtx { blackboard: &mut self.blackboard, trace: &mut self.recorder };
        self.root.tick(&mut ctx).expect("tick succeeds")
    }

    pub(crate) fn halt(&mut self) {
        let mut ctx =
            TickCtx { blackboard: &mut self.blackboard, trace: &mut self.recorder };
        self.root.halt(&mut ctx);
    }

    pub(crate) fn set_bb(&mut self, key: &str, value: Value) {
        self.blackboard.set(key, value);
    }

    pub(crate) fn take_events(&mut self) -> Vec<TraceEvent> {
        let recorder = std::mem::replace(&mut self.recorder, TraceRecorder::new(TraceVerbosity::Full));
        recorder.finish().events
    }
}
