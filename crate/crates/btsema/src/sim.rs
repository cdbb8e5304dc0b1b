//! The deterministic tick driver.
//!
//! Each cycle: apply the blackboard updates scheduled for this tick, move
//! simulated time forward by one advance per plugin, then tick the root to
//! completion and record the root result. Identical inputs produce
//! byte-identical traces.

use std::fmt;

use thiserror::Error;

use crate::blackboard::Blackboard;
use crate::node::{Response, RuntimeError, TickCtx, TreeNode};
use crate::scenario::{CrossCheckError, ScenarioSpec};
use crate::script::ScriptedPlugin;
use crate::trace::{Trace, TraceRecorder, TraceVerbosity};
use crate::validate::WellFormedTree;

/// Scenario-driven blackboard writes are attributed to this pseudo-node.
pub const SCENARIO_NODE: &str = "scenario";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_ticks: u64,
    /// Stop as soon as the root answers a terminal response.
    pub stop_on_terminal: bool,
    pub verbosity: TraceVerbosity,
}

impl RunConfig {
    /// A full-verbosity run over the scenario's own tick budget.
    pub fn for_scenario(scenario: &ScenarioSpec) -> Self {
        RunConfig {
            max_ticks: scenario.max_ticks.max(1),
            stop_on_terminal: false,
            verbosity: TraceVerbosity::Full,
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    /// The tick budget ran out.
    Completed,
    /// The root answered a terminal response and the run was configured to
    /// stop there.
    Terminal(Response),
    /// A runtime error aborted the run; it is also the last trace event.
    Faulted(RuntimeError),
}

impl RunOutcome {
    pub fn is_fault(&self) -> bool {
        matches!(self, RunOutcome::Faulted(_))
    }
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Completed => write!(f, "completed"),
            RunOutcome::Terminal(r) => write!(f, "terminal {r}"),
            RunOutcome::Faulted(e) => write!(f, "faulted: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trace: Trace,
    pub outcome: RunOutcome,
    /// Cycles entered, including a faulted one.
    pub cycles: u64,
}

/// The scenario does not fit the tree.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ScenarioMismatch(pub Vec<CrossCheckError>);

impl fmt::Display for ScenarioMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario does not fit the tree:")?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

/// Runs `tree` under `scenario`. A pure function of its inputs: every run
/// with the same arguments yields the same report.
pub fn run_simulation(
    tree: &WellFormedTree,
    scenario: &ScenarioSpec,
    config: &RunConfig,
) -> Result<RunReport, ScenarioMismatch> {
    run_simulation_observed(tree, scenario, config, &mut |_, _| {})
}

/// Like [`run_simulation`], calling `observe(cycle, root)` after every
/// completed (non-faulted) cycle. Used by conformance checks to snapshot
/// node states at cycle boundaries.
pub fn run_simulation_observed(
    tree: &WellFormedTree,
    scenario: &ScenarioSpec,
    config: &RunConfig,
    observe: &mut dyn FnMut(u64, &TreeNode),
) -> Result<RunReport, ScenarioMismatch> {
    scenario.cross_check(tree.spec()).map_err(ScenarioMismatch)?;
    let mut root = tree
        .instantiate(&mut |decl| match scenario.leaves.get(decl.name) {
            Some(script) => Ok(Box::new(ScriptedPlugin::new(script))),
            None => Err(format!("no script for leaf '{}'", decl.name)),
        })
        .expect("cross-check guarantees a script per leaf");

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
        root.advance_plugins();
        let mut ctx = TickCtx { blackboard: &mut blackboard, trace: &mut trace };
        match root.tick(&mut ctx) {
            Ok(response) => {
                trace.root_result(root.path(), response);
                observe(t, &root);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::SpecNode;
    use crate::node::Outcome;
    use crate::scenario::{Activation, LeafScript};
    use crate::trace::EventKind;

    type LeafRow<'a> = (&'a str, &'a [(u32, Outcome)], bool);

    fn scenario_with(leaves: &[LeafRow<'_>], max_ticks: u64) -> ScenarioSpec {
        ScenarioSpec {
            blackboard: Default::default(),
            updates: vec![],
            leaves: leaves
                .iter()
                .map(|(name, acts, cycle)| {
                    (
                        name.to_string(),
                        LeafScript {
                            activations: acts
                                .iter()
                                .map(|&(duration, outcome)| Activation { duration, outcome })
                                .collect(),
                            cycle: *cycle,
                        },
                    )
                })
                .collect(),
            max_ticks,
        }
    }

    fn root_results(report: &RunReport) -> Vec<String> {
        report
            .trace
            .events
            .iter()
            .filter(|e| e.ev == EventKind::RootResult)
            .map(|e| e.v.clone().unwrap())
            .collect()
    }

    #[test]
    fn stateless_condition_succeeds_every_cycle() {
        let tree = WellFormedTree::validate(SpecNode::condition("Ok")).unwrap();
        let scenario = scenario_with(&[("Ok", &[(0, Outcome::Success)], true)], 3);
        let report =
            run_simulation(&tree, &scenario, &RunConfig::for_scenario(&scenario)).unwrap();
        assert_eq!(root_results(&report), vec!["SUCCESS", "SUCCESS", "SUCCESS"]);
        assert_eq!(report.outcome, RunOutcome::Completed);
    }

    // One durative activation (2 cycles, SUCCESS): started at t0, still
    // running at t1, latched by t2's advance and delivered by t2's start.
    #[test]
    fn durative_action_completes_on_the_third_cycle() {
        let tree = WellFormedTree::validate(SpecNode::action("Go")).unwrap();
        let scenario = scenario_with(&[("Go", &[(2, Outcome::Success)], true)], 3);
        let report =
            run_simulation(&tree, &scenario, &RunConfig::for_scenario(&scenario)).unwrap();
        assert_eq!(root_results(&report), vec!["RUNNING", "RUNNING", "SUCCESS"]);
    }

    #[test]
    fn stop_on_terminal_cuts_the_run_short() {
        let tree = WellFormedTree::validate(SpecNode::action("Go")).unwrap();
        let scenario = scenario_with(&[("Go", &[(2, Outcome::Success)], true)], 10);
        let mut config = RunConfig::for_scenario(&scenario);
        config.stop_on_terminal = true;
        let report = run_simulation(&tree, &scenario, &config).unwrap();
        assert_eq!(report.outcome, RunOutcome::Terminal(Response::Success));
        assert_eq!(report.cycles, 3);
    }

    #[test]
    fn script_underrun_faults_the_run() {
        let tree = WellFormedTree::validate(SpecNode::condition("C")).unwrap();
        let scenario = scenario_with(&[("C", &[(0, Outcome::Success)], false)], 5);
        let report =
            run_simulation(&tree, &scenario, &RunConfig::for_scenario(&scenario)).unwrap();
        assert_eq!(
            report.outcome,
            RunOutcome::Faulted(RuntimeError::ScriptExhausted { path: "/".into() })
        );
        assert_eq!(report.cycles, 2);
        let last = report.trace.events.last().unwrap();
        assert_eq!(last.ev, EventKind::Error);
        assert_eq!(last.node, "/");
    }

    #[test]
    fn mismatched_scenario_is_rejected_up_front() {
        let tree = WellFormedTree::validate(SpecNode::action("Go")).unwrap();
        let scenario = scenario_with(&[], 3);
        assert!(run_simulation(&tree, &scenario, &RunConfig::for_scenario(&scenario)).is_err());
    }

    #[test]
    fn identical_runs_yield_identical_traces() {
        let tree = WellFormedTree::validate(SpecNode::reactive_sequence(vec![
            SpecNode::condition("C"),
            SpecNode::action("Go"),
        ]))
        .unwrap();
        let scenario = scenario_with(
            &[
                ("C", &[(0, Outcome::Success), (0, Outcome::Failure)], true),
                ("Go", &[(1, Outcome::Success), (2, Outcome::Failure)], true),
            ],
            12,
        );
        let config = RunConfig::for_scenario(&scenario);
        let a = run_simulation(&tree, &scenario, &config).unwrap();
        let b = run_simulation(&tree, &scenario, &config).unwrap();
        assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    }
}
