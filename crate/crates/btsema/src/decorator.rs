//! Single-child wrappers that rewrite their child's response.

use crate::node::{NodeMeta, NodeState, Outcome, Response, RuntimeError, TickCtx, TreeNode};

fn halt_child(child: &mut TreeNode, ctx: &mut TickCtx<'_>) {
    if child.state() != NodeState::Idle {
        child.halt(ctx);
    }
}

/// Swaps SUCCESS and FAILURE; RUNNING passes through.
#[derive(Debug)]
pub struct Inverter {
    pub(crate) child: Box<TreeNode>,
}

impl Inverter {
    pub(crate) fn new(child: TreeNode) -> Self {
        Inverter { child: Box::new(child) }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        match self.child.tick(ctx)? {
            Response::Success => {
                meta.state = NodeState::Idle;
                Ok(Response::Failure)
            }
            Response::Failure => {
                meta.state = NodeState::Idle;
                Ok(Response::Success)
            }
            Response::Running => {
                meta.state = NodeState::Running;
                Ok(Response::Running)
            }
        }
    }

    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_child(&mut self.child, ctx);
    }
}

/// Replaces any terminal child response with a fixed one. The child is still
/// ticked first, so its side effects happen either way.
#[derive(Debug)]
pub struct Force {
    pub(crate) what: Outcome,
    pub(crate) child: Box<TreeNode>,
}

impl Force {
    pub(crate) fn new(what: Outcome, child: TreeNode) -> Self {
        Force { what, child: Box::new(child) }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        let response = self.child.tick(ctx)?;
        if response == Response::Running {
            meta.state = NodeState::Running;
            Ok(Response::Running)
        } else {
            meta.state = NodeState::Idle;
            Ok(self.what.into())
        }
    }

    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_child(&mut self.child, ctx);
    }
}

/// Keeps re-activating its child across cycles until the child answers the
/// wanted terminal. An unwanted terminal leaves the child idle and the
/// wrapper running, so the next tick starts the child over. There is no
/// retry budget.
#[derive(Debug)]
pub struct RetryUntil {
    pub(crate) what: Outcome,
    pub(crate) child: Box<TreeNode>,
}

impl RetryUntil {
    pub(crate) fn new(what: Outcome, child: TreeNode) -> Self {
        RetryUntil { what, child: Box::new(child) }
    }

    pub(crate) fn tick(
        &mut self,
        meta: &mut NodeMeta,
        ctx: &mut TickCtx<'_>,
    ) -> Result<Response, RuntimeError> {
        let response = self.child.tick(ctx)?;
        if response == Response::from(self.what) {
            meta.state = NodeState::Idle;
            Ok(response)
        } else {
            meta.state = NodeState::Running;
            Ok(Response::Running)
        }
    }

    pub(crate) fn halt(&mut self, ctx: &mut TickCtx<'_>) {
        halt_child(&mut self.child, ctx);
    }
}

#[cfg(test)]
mod tests {
    use crate::ast::SpecNode;
    use crate::node::{NodeState, Outcome, Outcome::*, Response};
    use crate::testutil::*;
    use crate::trace::EventKind;

    fn one_shot(tree: SpecNode, leaf: &str, acts: &[(u32, Outcome)]) -> Vec<String> {
        let scenario = scenario(&[(leaf, acts)], &[], 1);
        let (report, _) = run(tree, &scenario);
        root_results(&report)
    }

    #[test]
    fn inverter_swaps_terminals_and_passes_running() {
        let spec = || SpecNode::inverter(SpecNode::condition("C"));
        assert_eq!(one_shot(spec(), "C", &[(0, Success)]), vec!["FAILURE"]);
        assert_eq!(one_shot(spec(), "C", &[(0, Failure)]), vec!["SUCCESS"]);

        let running = SpecNode::inverter(SpecNode::action("A"));
        let scenario = scenario(&[("A", &[(2, Success)])], &[], 1);
        let (report, snapshots) = run(running, &scenario);
        assert_eq!(root_results(&report), vec!["RUNNING"]);
        assert_eq!(snapshots[0].states[0], ("/".into(), NodeState::Running));
    }

    #[test]
    fn force_rewrites_any_terminal() {
        let forced_success = SpecNode::force(Success, SpecNode::condition("C"));
        assert_eq!(one_shot(forced_success, "C", &[(0, Failure)]), vec!["SUCCESS"]);
        let forced_failure = SpecNode::force(Failure, SpecNode::condition("C"));
        assert_eq!(one_shot(forced_failure, "C", &[(0, Success)]), vec!["FAILURE"]);
        let running = SpecNode::force(Success, SpecNode::action("A"));
        assert_eq!(one_shot(running, "A", &[(2, Failure)]), vec!["RUNNING"]);
    }

    // The child is ticked before its result is discarded, so its plugin
    // still runs.
    #[test]
    fn force_still_ticks_the_child() {
        let tree = SpecNode::force(Success, SpecNode::condition("C"));
        let scenario = scenario(&[("C", &[(0, Failure)])], &[], 1);
        let (report, _) = run(tree, &scenario);
        assert!(report
            .trace
            .events
            .iter()
            .any(|e| e.ev == EventKind::PluginStart && e.node == "/condition:C"));
    }

    #[test]
    fn retry_until_returns_only_the_wanted_terminal() {
        let tree = SpecNode::retry_until(Success, SpecNode::condition("C"));
        assert_eq!(one_shot(tree, "C", &[(0, Success)]), vec!["SUCCESS"]);
        let tree = SpecNode::retry_until(Success, SpecNode::action("A"));
        assert_eq!(one_shot(tree, "A", &[(2, Success)]), vec!["RUNNING"]);
    }

    // An unwanted terminal leaves the wrapper RUNNING over an idle child;
    // the next cycle starts the child over.
    #[test]
    fn retry_until_restarts_the_child_after_the_wrong_terminal() {
        let tree = SpecNode::retry_until(Success, SpecNode::condition("C"));
        let scenario = scenario(&[("C", &[(0, Failure), (0, Success)])], &[], 2);
        let (report, snapshots) = run(tree, &scenario);
        assert_eq!(root_results(&report), vec!["RUNNING", "SUCCESS"]);
        let t0: std::collections::BTreeMap<_, _> =
            snapshots[0].states.iter().cloned().collect();
        assert_eq!(t0["/"], NodeState::Running);
        assert_eq!(t0["/condition:C"], NodeState::Idle, "wrapper runs over an idle child");
    }

    #[test]
    fn decorator_halt_reaches_a_running_child() {
        let tree = SpecNode::inverter(SpecNode::action("A"));
        let scenario = scenario(&[("A", &[(3, Success)])], &[], 1);
        let mut manual = Manual::new(tree, &scenario);
        assert_eq!(manual.tick(), Response::Running);
        manual.take_events();
        manual.halt();
        let events = manual.take_events();
        let kinds: Vec<_> = events.iter().map(|e| (e.ev, e.node.as_str())).collect();
        assert_eq!(
            kinds,
            vec![
                (EventKind::Halt, "/"),
                (EventKind::Halt, "/action:A"),
                (EventKind::PluginStop, "/action:A"),
            ]
        );
        assert!(manual.root.snapshot_states().iter().all(|(_, s)| *s == NodeState::Idle));

        // A second halt finds everything idle and touches nothing below.
        manual.halt();
        let again = manual.take_events();
        assert_eq!(again.len(), 1);
        assert_eq!(again[0].node, "/");
    }

    #[test]
    fn halt_cascades_through_a_decorator_stack_to_the_plugin() {
        let tree = SpecNode::inverter(SpecNode::force(
            Failure,
            SpecNode::retry_until(Success, SpecNode::action("A")),
        ));
        let scenario = scenario(&[("A", &[(3, Success)])], &[], 1);
        let mut manual = Manual::new(tree, &scenario);
        assert_eq!(manual.tick(), Response::Running);
        manual.take_events();
        manual.halt();
        let events = manual.take_events();
        let stop = events
            .iter()
            .find(|e| e.ev == EventKind::PluginStop)
            .expect("plugin stopped through three wrappers");
        assert_eq!(stop.node, "/force#0/retry-until#0/action:A");
        assert!(manual.root.snapshot_states().iter().all(|(_, s)| *s == NodeState::Idle));
    }
}
