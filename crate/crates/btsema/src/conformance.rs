//! Trace-level invariant checks.
//!
//! These run over a recorded trace (engine or oracle, they share the schema)
//! plus optional per-cycle state snapshots from the engine, and report every
//! violation of the semantic invariants:
//!
//! - a node's queryable state equals RUNNING exactly when its last tick
//!   answered RUNNING, and a halt idles its whole subtree (checked by
//!   folding events into expected states, demanding an idle subtree once a
//!   halt's recursion is over, and comparing the fold against engine
//!   snapshots at cycle boundaries);
//! - conditions never answer RUNNING;
//! - reactive sequence/fallback and switch leave at most one child non-idle,
//!   and memory sequence/fallback do so whenever they answer RUNNING;
//! - memory nodes never re-tick a completed child before a reset;
//! - the two parallel thresholds are mutually exclusive.
//!
//! Paths are assumed unique per node (duplicate leaf names under one parent
//! would alias and confuse the bookkeeping; the corpus generator never emits
//! those).

use std::collections::BTreeMap;

use crate::ast::{child_path, SpecKind, SpecNode};
use crate::node::NodeState;
use crate::trace::{EventKind, Trace, TraceEvent};

/// Engine state snapshot taken after one cycle's root tick.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSnapshot {
    pub t: u64,
    pub states: Vec<(String, NodeState)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub cycle: u64,
    pub node: String,
    pub rule: &'static str,
    pub detail: String,
}

impl std::fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cycle {}: {} [{}]: {}", self.cycle, self.node, self.rule, self.detail)
    }
}

/// What marks a child of a memory node as not-to-be-reticked.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Completes {
    OnSuccess,
    OnFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Action,
    Condition,
    SingleRunningChild,
    MemorySingleRunning { completes: Completes },
    Parallel { threshold: usize, memory: bool },
    Decorator,
}

struct NodeInfo {
    shape: Shape,
    children: Vec<String>,
}

struct Model {
    info: BTreeMap<String, NodeInfo>,
    parent: BTreeMap<String, (String, usize)>,
    reactive_parallels: Vec<String>,
}

fn model_of(spec: &SpecNode) -> Model {
    let mut info = BTreeMap::new();
    let mut parent = BTreeMap::new();
    let mut reactive_parallels = Vec::new();
    spec.visit_with_paths(&mut |node, path| {
        let shape = match &node.kind {
            SpecKind::Action { .. } => Shape::Action,
            SpecKind::Condition { .. } => Shape::Condition,
            SpecKind::ReactiveSequence | SpecKind::ReactiveFallback | SpecKind::Switch { .. } => {
                Shape::SingleRunningChild
            }
            SpecKind::SequenceWithMemory => {
                Shape::MemorySingleRunning { completes: Completes::OnSuccess }
            }
            SpecKind::FallbackWithMemory => {
                Shape::MemorySingleRunning { completes: Completes::OnFailure }
            }
            SpecKind::ReactiveParallel { threshold } => {
                reactive_parallels.push(path.to_owned());
                Shape::Parallel { threshold: *threshold as usize, memory: false }
            }
            SpecKind::ParallelWithMemory { threshold } => {
                Shape::Parallel { threshold: *threshold as usize, memory: true }
            }
            SpecKind::Inverter | SpecKind::Force { .. } | SpecKind::RetryUntil { .. } => {
                Shape::Decorator
            }
        };
        let mut children = Vec::with_capacity(node.children.len());
        for (ord, child) in node.children.iter().enumerate() {
            let cp = child_path(path, &child.kind.path_segment(ord));
            parent.insert(cp.clone(), (path.to_owned(), ord));
            children.push(cp);
        }
        info.insert(path.to_owned(), NodeInfo { shape, children });
    });
    Model { info, parent, reactive_parallels }
}

fn in_subtree(root: &str, path: &str) -> bool {
    if root == "/" {
        return path.starts_with('/');
    }
    path == root || (path.starts_with(root) && path[root.len()..].starts_with('/'))
}

/// Completed-children flags and counters for one memory or parallel node.
struct MemoryTrack {
    done: Vec<bool>,
    successes: usize,
    failures: usize,
}

struct Checker<'m> {
    model: &'m Model,
    states: BTreeMap<String, NodeState>,
    tracks: BTreeMap<String, MemoryTrack>,
    pending_halts: Vec<(u64, String)>,
    last_root_tick: Option<String>,
    violations: Vec<InvariantViolation>,
}

impl<'m> Checker<'m> {
    fn new(model: &'m Model) -> Self {
        let states = model.info.keys().map(|p| (p.clone(), NodeState::Idle)).collect();
        let tracks = model
            .info
            .iter()
            .filter(|(_, i)| {
                matches!(i.shape, Shape::Parallel { .. } | Shape::MemorySingleRunning { .. })
            })
            .map(|(p, i)| {
                (
                    p.clone(),
                    MemoryTrack { done: vec![false; i.children.len()], successes: 0, failures: 0 },
                )
            })
            .collect();
        Checker {
            model,
            states,
            tracks,
            pending_halts: Vec::new(),
            last_root_tick: None,
            violations: Vec::new(),
        }
    }

    fn report(&mut self, cycle: u64, node: &str, rule: &'static str, detail: String) {
        self.violations.push(InvariantViolation { cycle, node: node.to_owned(), rule, detail });
    }

    fn non_idle_children(&self, path: &str) -> usize {
        self.model.info[path]
            .children
            .iter()
            .filter(|c| self.states.get(*c) == Some(&NodeState::Running))
            .count()
    }

    fn flush_pending(&mut self, upto: Option<&TraceEvent>) {
        let pending = std::mem::take(&mut self.pending_halts);
        let mut keep = Vec::new();
        for (t, root) in pending {
            let settled = match upto {
                None => true,
                Some(e) => e.t > t || !in_subtree(&root, &e.node),
            };
            if settled {
                let offenders: Vec<String> = self
                    .states
                    .iter()
                    .filter(|(path, state)| {
                        in_subtree(&root, path) && **state != NodeState::Idle
                    })
                    .map(|(path, _)| path.clone())
                    .collect();
                for path in offenders {
                    self.report(
                        t,
                        &root,
                        "halt-subtree-idle",
                        format!("{path} still RUNNING after halt of {root}"),
                    );
                }
            } else {
                keep.push((t, root));
            }
        }
        self.pending_halts = keep;
    }

    fn reset_track(&mut self, path: &str) {
        if let Some(track) = self.tracks.get_mut(path) {
            track.done.fill(false);
            track.successes = 0;
            track.failures = 0;
        }
    }

    fn on_cycle_boundary(&mut self) {
        // Reactive parallels count within one cycle only.
        for p in self.model.reactive_parallels.clone() {
            self.reset_track(&p);
        }
    }

    fn tick_result(&mut self, event: &TraceEvent) {
        let model = self.model;
        let path = event.node.as_str();
        let value = event.v.as_deref().unwrap_or("");
        let Some(info) = model.info.get(path) else {
            self.report(event.t, path, "unknown-node", "tick_result for a path not in the tree".into());
            return;
        };

        if info.shape == Shape::Condition && value == "RUNNING" {
            self.report(event.t, path, "condition-running", "condition answered RUNNING".into());
        }

        // Child-side bookkeeping for memory/parallel parents.
        if let Some((parent_path, ord)) = model.parent.get(path) {
            let parent_shape = model.info[parent_path].shape;
            let n = model.info[parent_path].children.len();
            let mut reticked = false;
            let mut exclusivity: Option<(usize, usize, usize)> = None;
            if let Some(track) = self.tracks.get_mut(parent_path) {
                match parent_shape {
                    Shape::Parallel { threshold, memory } => {
                        if memory && track.done[*ord] {
                            reticked = true;
                        }
                        if value != "RUNNING" {
                            track.done[*ord] = true;
                            if value == "SUCCESS" {
                                track.successes += 1;
                            } else {
                                track.failures += 1;
                            }
                            if track.successes >= threshold && track.failures > n - threshold {
                                exclusivity = Some((track.successes, track.failures, threshold));
                            }
                        }
                    }
                    Shape::MemorySingleRunning { completes } => {
                        if track.done[*ord] {
                            reticked = true;
                        }
                        let completed = match completes {
                            Completes::OnSuccess => value == "SUCCESS",
                            Completes::OnFailure => value == "FAILURE",
                        };
                        if completed {
                            track.done[*ord] = true;
                        }
                    }
                    _ => {}
                }
            }
            let parent_path = parent_path.clone();
            if reticked {
                self.report(
                    event.t,
                    &parent_path,
                    "memory-re-tick",
                    format!("completed child {path} ticked again before reset"),
                );
            }
            if let Some((s, f, k)) = exclusivity {
                self.report(
                    event.t,
                    &parent_path,
                    "threshold-exclusivity",
                    format!("successes={s} failures={f} n={n} k={k}"),
                );
            }
        }

        // Parent-side checks once the node's own result is in.
        match info.shape {
            Shape::SingleRunningChild => {
                let running = self.non_idle_children(path);
                if running > 1 {
                    self.report(
                        event.t,
                        path,
                        "single-running-child",
                        format!("{running} children non-idle after tick"),
                    );
                }
            }
            Shape::MemorySingleRunning { .. } if value == "RUNNING" => {
                let running = self.non_idle_children(path);
                if running > 1 {
                    self.report(
                        event.t,
                        path,
                        "single-running-child",
                        format!("{running} children non-idle while RUNNING"),
                    );
                }
            }
            _ => {}
        }

        if value != "RUNNING" {
            // A finished node starts from scratch at its next activation.
            self.reset_track(path);
        }
        let folded = if value == "RUNNING" { NodeState::Running } else { NodeState::Idle };
        self.states.insert(event.node.clone(), folded);
        if path == "/" {
            self.last_root_tick = Some(value.to_owned());
        }
    }

    fn snapshot_compare(&mut self, snapshot: &CycleSnapshot) {
        for (path, actual) in &snapshot.states {
            let expected = self.states.get(path).copied();
            match expected {
                Some(expected) if expected == *actual => {}
                Some(expected) => self.report(
                    snapshot.t,
                    path,
                    "state-snapshot",
                    format!("trace implies {expected}, engine reports {actual}"),
                ),
                None => self.report(
                    snapshot.t,
                    path,
                    "state-snapshot",
                    "engine node unknown to the tree description".into(),
                ),
            }
        }
    }
}

/// Checks every invariant over one run. `snapshots`, when provided, are the
/// engine's post-cycle states keyed by cycle. Expects a full-verbosity trace.
pub fn check_run(
    spec: &SpecNode,
    trace: &Trace,
    snapshots: &[CycleSnapshot],
) -> Vec<InvariantViolation> {
    let model = model_of(spec);
    let mut checker = Checker::new(&model);
    let by_cycle: BTreeMap<u64, &CycleSnapshot> = snapshots.iter().map(|s| (s.t, s)).collect();

    let mut current_t = 0u64;
    for event in &trace.events {
        checker.flush_pending(Some(event));
        if event.t != current_t {
            if let Some(snapshot) = by_cycle.get(&current_t) {
                checker.snapshot_compare(snapshot);
            }
            checker.on_cycle_boundary();
            current_t = event.t;
        }
        match event.ev {
            EventKind::TickResult => checker.tick_result(event),
            EventKind::Halt => {
                checker.states.insert(event.node.clone(), NodeState::Idle);
                checker.reset_track(&event.node);
                checker.pending_halts.push((event.t, event.node.clone()));
            }
            EventKind::RootResult => {
                if let Some(root) = checker.last_root_tick.take() {
                    if Some(root.as_str()) != event.v.as_deref() {
                        checker.report(
                            event.t,
                            "/",
                            "root-result-mismatch",
                            format!("root ticked {root:?} but root_result says {:?}", event.v),
                        );
                    }
                }
            }
            EventKind::PluginStart
            | EventKind::PluginStop
            | EventKind::BbRead
            | EventKind::BbWrite
            | EventKind::Error => {}
        }
    }
    checker.flush_pending(None);
    if let Some(snapshot) = by_cycle.get(&current_t) {
        checker.snapshot_compare(snapshot);
    }
    checker.violations
}
