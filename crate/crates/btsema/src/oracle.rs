//! Reference interpreter used as the conformance oracle.
//!
//! This is a second, independent implementation of the execution semantics:
//! one recursive function over the immutable tree description plus an
//! explicit memory store (cursors, counters, completion flags, switch
//! memory, plugin modes). It shares the vocabulary types with the engine —
//! responses, values, errors, the trace schema — but none of its node
//! objects or plugin code. Engine and oracle must produce byte-identical
//! traces; any divergence is a bug in one of them.
//!
//! For sensitivity checks the oracle can run with one deliberately seeded
//! semantic fault; a differential corpus that fails to expose every fault is
//! too weak.

use crate::blackboard::Blackboard;
use crate::ast::{child_path, SpecKind, SpecNode, ROOT_PATH};
use crate::node::{NodeState, Outcome, Response, RuntimeError};
use crate::scenario::{Activation, ScenarioSpec};
use crate::sim::{RunConfig, RunOutcome, RunReport, ScenarioMismatch, SCENARIO_NODE};
use crate::trace::TraceRecorder;
use crate::validate::WellFormedTree;

/// One deliberately wrong semantic rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeededFault {
    /// Parallel failure check fires already at `failures == n - k`.
    ParallelFailureAtBound,
    /// Reactive sequence/fallback skip halting later children on short-circuit.
    SkipShortCircuitHalt,
    /// Sequence-with-memory keeps its cursor when a child fails.
    KeepCursorOnFailure,
    /// Switch does not halt the previously routed child when the route changes.
    SwitchKeepsStaleChild,
    /// Parallel-with-memory halt keeps counters and completion flags.
    ParallelHaltKeepsMemory,
    /// Action halt leaves a running plugin running.
    ActionHaltSkipsStop,
}

pub const ALL_FAULTS: [SeededFault; 6] = [
    SeededFault::ParallelFailureAtBound,
    SeededFault::SkipShortCircuitHalt,
    SeededFault::KeepCursorOnFailure,
    SeededFault::SwitchKeepsStaleChild,
    SeededFault::ParallelHaltKeepsMemory,
    SeededFault::ActionHaltSkipsStop,
];

/// Flattened description node: the spec, its trace path, and child ids.
struct Flat<'s> {
    kind: &'s SpecKind,
    path: String,
    children: Vec<usize>,
}

/// Scripted component state machine, re-transcribed for the oracle.
struct PluginSim {
    activations: Vec<Activation>,
    cycle: bool,
    cursor: usize,
    mode: SimMode,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SimMode {
    Idle,
    Running { remaining: u32, outcome: Outcome },
    Latched(Outcome),
}

/// Per-node interpretation memory.
struct Mem {
    state: NodeState,
    cursor: usize,
    successes: usize,
    failures: usize,
    completed: Vec<bool>,
    last_routed: Option<usize>,
    plugin: Option<PluginSim>,
}

fn flatten<'s>(spec: &'s SpecNode, scenario: &ScenarioSpec) -> (Vec<Flat<'s>>, Vec<Mem>) {
    let mut nodes = Vec::new();
    let mut mem = Vec::new();
    fn walk<'s>(
        node: &'s SpecNode,
        path: String,
        scenario: &ScenarioSpec,
        nodes: &mut Vec<Flat<'s>>,
        mem: &mut Vec<Mem>,
    ) -> usize {
        let id = nodes.len();
        nodes.push(Flat { kind: &node.kind, path, children: Vec::new() });
        let plugin = match &node.kind {
            SpecKind::Action { name, .. } | SpecKind::Condition { name, .. } => {
                let script = &scenario.leaves[name];
                Some(PluginSim {
                    activations: script.activations.clone(),
                    cycle: script.cycle,
                    cursor: 0,
                    mode: SimMode::Idle,
                })
            }
            _ => None,
        };
        mem.push(Mem {
            state: NodeState::Idle,
            cursor: 0,
            successes: 0,
            failures: 0,
            completed: vec![false; node.children.len()],
            last_routed: None,
            plugin,
        });
        let mut child_ids = Vec::with_capacity(node.children.len());
        for (ord, child) in node.children.iter().enumerate() {
            let p = child_path(&nodes[id].path, &child.kind.path_segment(ord));
            child_ids.push(walk(child, p, scenario, nodes, mem));
        }
        nodes[id].children = child_ids;
        id
    }
    walk(spec, ROOT_PATH.to_owned(), scenario, &mut nodes, &mut mem);
    (nodes, mem)
}

fn sim_check(mem: &Mem) -> NodeState {
    match mem.plugin.as_ref().expect("leaf plugin").mode {
        SimMode::Running { .. } => NodeState::Running,
        SimMode::Idle | SimMode::Latched(_) => NodeState::Idle,
    }
}

fn sim_start(mem: &mut Mem, path: &str) -> Result<Response, RuntimeError> {
    let sim = mem.plugin.as_mut().expect("leaf plugin");
    match sim.mode {
        SimMode::Latched(outcome) => {
            sim.mode = SimMode::Idle;
            Ok(outcome.into())
        }
        SimMode::Running { .. } => {
            Err(RuntimeError::StartWhileRunning { path: path.to_owned() })
        }
        SimMode::Idle => {
            if sim.cursor >= sim.activations.len() {
                if sim.cycle && !sim.activations.is_empty() {
                    sim.cursor = 0;
                } else {
                    return Err(RuntimeError::ScriptExhausted { path: path.to_owned() });
                }
            }
            let activation = sim.activations[sim.cursor];
            sim.cursor += 1;
            if activation.duration == 0 {
                Ok(activation.outcome.into())
            } else {
                sim.mode = SimMode::Running {
                    remaining: activation.duration,
                    outcome: activation.outcome,
                };
                Ok(Response::Running)
            }
        }
    }
}

fn sim_stop(mem: &mut Mem) {
    let sim = mem.plugin.as_mut().expect("leaf plugin");
    if let SimMode::Running { .. } = sim.mode {
        sim.mode = SimMode::Idle;
    }
}

fn sim_advance(mem: &mut Mem) {
    if let Some(sim) = mem.plugin.as_mut() {
        if let SimMode::Running { remaining, outcome } = sim.mode {
            sim.mode = if remaining <= 1 {
                SimMode::Latched(outcome)
            } else {
                SimMode::Running { remaining: remaining - 1, outcome }
            };
        }
    }
}

fn tick(
    nodes: &[Flat<'_>],
    mem: &mut [Mem],
    fault: Option<SeededFault>,
    id: usize,
    bb: &mut Blackboard,
    tr: &mut TraceRecorder,
) -> Result<Response, RuntimeError> {
    let response = match nodes[id].kind {
        SpecKind::Action { .. } => {
            if sim_check(&mem[id]) == NodeState::Idle {
                let response = sim_start(&mut mem[id], &nodes[id].path)?;
                tr.plugin_start(&nodes[id].path, response);
                if response == Response::Running {
                    mem[id].state = NodeState::Running;
                    Response::Running
                } else {
                    sim_stop(&mut mem[id]);
                    tr.plugin_stop(&nodes[id].path);
                    mem[id].state = NodeState::Idle;
                    response
                }
            } else {
                Response::Running
            }
        }
        SpecKind::Condition { .. } => {
            let response = sim_start(&mut mem[id], &nodes[id].path)?;
            tr.plugin_start(&nodes[id].path, response);
            if response == Response::Running {
                return Err(RuntimeError::ConditionReturnedRunning {
                    path: nodes[id].path.clone(),
                });
            }
            response
        }
        SpecKind::ReactiveSequence => {
            let mut result = Response::Success;
            for i in 0..nodes[id].children.len() {
                let child = nodes[id].children[i];
                let r = tick(nodes, mem, fault, child, bb, tr)?;
                if r != Response::Success {
                    if fault != Some(SeededFault::SkipShortCircuitHalt) {
                        for &later in &nodes[id].children[i + 1..] {
                            if mem[later].state != NodeState::Idle {
                                halt(nodes, mem, fault, later, tr);
                            }
                        }
                    }
                    result = r;
                    break;
                }
            }
            mem[id].state = if result == Response::Running {
                NodeState::Running
            } else {
                NodeState::Idle
            };
            result
        }
        SpecKind::ReactiveFallback => {
            let mut result = Response::Failure;
            for i in 0..nodes[id].children.len() {
                let child = nodes[id].children[i];
                let r = tick(nodes, mem, fault, child, bb, tr)?;
                if r != Response::Failure {
                    if fault != Some(SeededFault::SkipShortCircuitHalt) {
                        for &later in &nodes[id].children[i + 1..] {
                            if mem[later].state != NodeState::Idle {
                                halt(nodes, mem, fault, later, tr);
                            }
                        }
                    }
                    result = r;
                    break;
                }
            }
            mem[id].state = if result == Response::Running {
                NodeState::Running
            } else {
                NodeState::Idle
            };
            result
        }
        SpecKind::ReactiveParallel { threshold } => {
            let k = *threshold as usize;
            let n = nodes[id].children.len();
            let mut successes = 0usize;
            let mut failures = 0usize;
            for i in 0..n {
                match tick(nodes, mem, fault, nodes[id].children[i], bb, tr)? {
                    Response::Success => successes += 1,
                    Response::Failure => failures += 1,
                    Response::Running => {}
                }
            }
            let failed = match fault {
                Some(SeededFault::ParallelFailureAtBound) => failures >= n - k,
                _ => failures > n - k,
            };
            if successes >= k {
                halt(nodes, mem, fault, id, tr);
                Response::Success
            } else if failed {
                halt(nodes, mem, fault, id, tr);
                Response::Failure
            } else {
                mem[id].state = NodeState::Running;
                Response::Running
            }
        }
        SpecKind::SequenceWithMemory => {
            let n = nodes[id].children.len();
            let mut result = Response::Success;
            for j in mem[id].cursor..n {
                match tick(nodes, mem, fault, nodes[id].children[j], bb, tr)? {
                    Response::Running => {
                        mem[id].cursor = j;
                        mem[id].state = NodeState::Running;
                        return finish(tr, &nodes[id].path, Response::Running);
                    }
                    Response::Failure => {
                        if fault != Some(SeededFault::KeepCursorOnFailure) {
                            mem[id].cursor = 0;
                        }
                        result = Response::Failure;
                        break;
                    }
                    Response::Success => {}
                }
            }
            if result == Response::Success {
                mem[id].cursor = 0;
            }
            mem[id].state = NodeState::Idle;
            result
        }
        SpecKind::FallbackWithMemory => {
            let n = nodes[id].children.len();
            let mut result = Response::Failure;
            for j in mem[id].cursor..n {
                match tick(nodes, mem, fault, nodes[id].children[j], bb, tr)? {
                    Response::Running => {
                        mem[id].cursor = j;
                        mem[id].state = NodeState::Running;
                        return finish(tr, &nodes[id].path, Response::Running);
                    }
                    Response::Success => {
                        mem[id].cursor = 0;
                        result = Response::Success;
                        break;
                    }
                    Response::Failure => {}
                }
            }
            if result == Response::Failure {
                mem[id].cursor = 0;
            }
            mem[id].state = NodeState::Idle;
            result
        }
        SpecKind::ParallelWithMemory { threshold } => {
            let k = *threshold as usize;
            let n = nodes[id].children.len();
            for i in 0..n {
                if !mem[id].completed[i] {
                    let r = tick(nodes, mem, fault, nodes[id].children[i], bb, tr)?;
                    if r != Response::Running {
                        mem[id].completed[i] = true;
                        match r {
                            Response::Success => mem[id].successes += 1,
                            Response::Failure => mem[id].failures += 1,
                            Response::Running => unreachable!(),
                        }
                    }
                }
            }
            let failed = match fault {
                Some(SeededFault::ParallelFailureAtBound) => mem[id].failures >= n - k,
                _ => mem[id].failures > n - k,
            };
            if mem[id].successes >= k {
                halt(nodes, mem, fault, id, tr);
                Response::Success
            } else if failed {
                halt(nodes, mem, fault, id, tr);
                Response::Failure
            } else {
                mem[id].state = NodeState::Running;
                Response::Running
            }
        }
        SpecKind::Switch { key } => {
            let path = &nodes[id].path;
            let n = nodes[id].children.len();
            let value = bb
                .lookup(key)
                .map_err(|e| RuntimeError::MissingKey { path: path.clone(), key: e.key })?;
            let index = value.as_int().ok_or_else(|| RuntimeError::KeyNotInt {
                path: path.clone(),
                key: key.clone(),
                found: value.clone(),
            })?;
            if index < 0 || index as usize >= n {
                return Err(RuntimeError::RouteOutOfRange {
                    path: path.clone(),
                    key: key.clone(),
                    index,
                    len: n,
                });
            }
            let value = value.clone();
            tr.bb_read(&nodes[id].path, key, &value);
            let next = index as usize;
            if mem[id].last_routed != Some(next) {
                if let Some(previous) = mem[id].last_routed {
                    let previous_child = nodes[id].children[previous];
                    if mem[previous_child].state != NodeState::Idle
                        && fault != Some(SeededFault::SwitchKeepsStaleChild)
                    {
                        halt(nodes, mem, fault, previous_child, tr);
                    }
                }
                mem[id].last_routed = Some(next);
            }
            let r = tick(nodes, mem, fault, nodes[id].children[next], bb, tr)?;
            if r == Response::Running {
                mem[id].state = NodeState::Running;
                Response::Running
            } else {
                mem[id].state = NodeState::Idle;
                mem[id].last_routed = None;
                r
            }
        }
        SpecKind::Inverter => {
            match tick(nodes, mem, fault, nodes[id].children[0], bb, tr)? {
                Response::Success => {
                    mem[id].state = NodeState::Idle;
                    Response::Failure
                }
                Response::Failure => {
                    mem[id].state = NodeState::Idle;
                    Response::Success
                }
                Response::Running => {
                    mem[id].state = NodeState::Running;
                    Response::Running
                }
            }
        }
        SpecKind::Force { what } => {
            let r = tick(nodes, mem, fault, nodes[id].children[0], bb, tr)?;
            if r == Response::Running {
                mem[id].state = NodeState::Running;
                Response::Running
            } else {
                mem[id].state = NodeState::Idle;
                Response::from(*what)
            }
        }
        SpecKind::RetryUntil { what } => {
            let r = tick(nodes, mem, fault, nodes[id].children[0], bb, tr)?;
            if r == Response::from(*what) {
                mem[id].state = NodeState::Idle;
                r
            } else {
                mem[id].state = NodeState::Running;
                Response::Running
            }
        }
    };
    tr.tick_result(&nodes[id].path, response);
    Ok(response)
}

// The early-return spots share this so every successful tick records its
// result exactly once.
fn finish(tr: &mut TraceRecorder, path: &str, response: Response) -> Result<Response, RuntimeError> {
    tr.tick_result(path, response);
    Ok(response)
}

fn halt(nodes: &[Flat<'_>], mem: &mut [Mem], fault: Option<SeededFault>, id: usize, tr: &mut TraceRecorder) {
    tr.halt(&nodes[id].path);
    match nodes[id].kind {
        SpecKind::Action { .. } => {
            if sim_check(&mem[id]) != NodeState::Idle && fault != Some(SeededFault::ActionHaltSkipsStop)
            {
                sim_stop(&mut mem[id]);
                tr.plugin_stop(&nodes[id].path);
            }
        }
        SpecKind::Condition { .. } => {}
        SpecKind::SequenceWithMemory | SpecKind::FallbackWithMemory => {
            halt_children(nodes, mem, fault, id, tr);
            mem[id].cursor = 0;
        }
        SpecKind::ParallelWithMemory { .. } => {
            halt_children(nodes, mem, fault, id, tr);
            if fault != Some(SeededFault::ParallelHaltKeepsMemory) {
                mem[id].successes = 0;
                mem[id].failures = 0;
                mem[id].completed.fill(false);
            }
        }
        _ => halt_children(nodes, mem, fault, id, tr),
    }
    mem[id].state = NodeState::Idle;
}

fn halt_children(nodes: &[Flat<'_>], mem: &mut [Mem], fault: Option<SeededFault>, id: usize, tr: &mut TraceRecorder) {
    for i in 0..nodes[id].children.len() {
        let child = nodes[id].children[i];
        if mem[child].state != NodeState::Idle {
            halt(nodes, mem, fault, child, tr);
        }
    }
}

fn run(
    tree: &WellFormedTree,
    scenario: &ScenarioSpec,
    config: &RunConfig,
    fault: Option<SeededFault>,
) -> Result<RunReport, ScenarioMismatch> {
    scenario.cross_check(tree.spec()).map_err(ScenarioMismatch)?;
    let (nodes, mut mem) = flatten(tree.spec(), scenario);
    let mut blackboard: Blackboard =
        scenario.blackboard.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let mut trace = TraceRecorder::new(config.verbosity);
    let mut outcome = RunOutcome::Completed;
    let mut cycles = 0u64;

    for t in 0..config.max_ticks {
        cycles = t + 1;
        trace.begin_cycle(t);
        for update in scenario.updates.iter().filter(|u| u.tick == t) {
            blackboard.set(update.key.clone(), update.value.clone());
            trace.bb_write(SCENARIO_NODE, &update.key, &update.value);
        }
        for m in mem.iter_mut() {
            sim_advance(m);
        }
        match tick(&nodes, &mut mem, fault, 0, &mut blackboard, &mut trace) {
            Ok(response) => {
                trace.root_result(&nodes[0].path, response);
                if config.stop_on_terminal && response.is_terminal() {
                    outcome = RunOutcome::Terminal(response);
                    break;
                }
            }
            Err(error) => {
                trace.error(error.path(), &error.to_string());
                outcome = RunOutcome::Faulted(error);
                break;
            }
        }
    }

    Ok(RunReport { trace: trace.finish(), outcome, cycles })
}

/// Runs the reference interpreter; same contract as
/// [`crate::sim::run_simulation`].
pub fn oracle_run(
    tree: &WellFormedTree,
    scenario: &ScenarioSpec,
    config: &RunConfig,
) -> Result<RunReport, ScenarioMismatch> {
    run(tree, scenario, config, None)
}

/// Runs the reference interpreter with one seeded semantic fault.
pub fn oracle_run_with_fault(
    tree: &WellFormedTree,
    scenario: &ScenarioSpec,
    config: &RunConfig,
    fault: SeededFault,
) -> Result<RunReport, ScenarioMismatch> {
    run(tree, scenario, config, Some(fault))
}
