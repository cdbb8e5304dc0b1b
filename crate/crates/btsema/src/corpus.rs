//! Seeded random generation of (tree, scenario, config) cases for
//! differential and invariant testing.
//!
//! Generation is deterministic per seed across platforms (ChaCha-backed).
//! Every node kind is reachable; a small share of cases carries deliberately
//! broken switch routing or non-cycling scripts so error paths get compared
//! too.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::SpecNode;
use crate::node::Outcome;
use crate::scenario::{Activation, LeafScript, ScenarioSpec, ScheduledUpdate};
use crate::sim::RunConfig;
use crate::trace::TraceVerbosity;
use crate::value::Value;

#[derive(Debug, Clone)]
pub struct CorpusParams {
    pub max_depth: usize,
    pub max_fanout: usize,
    pub max_activations: usize,
    pub max_duration: u32,
    pub max_cycles: u64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_depth: 4,
            max_fanout: 5,
            max_activations: 6,
            max_duration: 3,
            max_cycles: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedCase {
    pub seed: u64,
    pub tree: SpecNode,
    pub scenario: ScenarioSpec,
    pub config: RunConfig,
}

struct Gen<'p> {
    rng: ChaCha8Rng,
    params: &'p CorpusParams,
    action_names: Vec<String>,
    condition_names: Vec<String>,
    switch_keys: Vec<(String, usize)>,
}

impl Gen<'_> {
    fn node(&mut self, depth: usize, sibling_leaves: &mut BTreeSet<String>) -> SpecNode {
        if depth >= self.params.max_depth {
            return self.leaf(sibling_leaves);
        }
        let roll = self.rng.gen_range(0..100u32);
        if depth == 0 {
            // A bare-leaf root is legal but dull; mostly start with a composite.
            match roll {
                0..=87 => self.control(depth),
                88..=97 => self.decorator(depth),
                _ => self.leaf(sibling_leaves),
            }
        } else {
            match roll {
                0..=37 => self.leaf(sibling_leaves),
                38..=79 => self.control(depth),
                _ => self.decorator(depth),
            }
        }
    }

    fn leaf(&mut self, sibling_leaves: &mut BTreeSet<String>) -> SpecNode {
        let is_action = self.rng.gen_range(0..100u32) < 60;
        let name = self.leaf_name(is_action, sibling_leaves);
        sibling_leaves.insert(name.clone());
        if is_action {
            SpecNode::action(name)
        } else {
            SpecNode::condition(name)
        }
    }

    // Names may repeat across the tree (sharing one script), but never among
    // direct siblings, so every trace path stays unique.
    fn leaf_name(&mut self, is_action: bool, sibling_leaves: &BTreeSet<String>) -> String {
        let pool = if is_action { &self.action_names } else { &self.condition_names };
        if !pool.is_empty() && self.rng.gen_range(0..100u32) < 15 {
            let candidate = pool[self.rng.gen_range(0..pool.len())].clone();
            if !sibling_leaves.contains(&candidate) {
                return candidate;
            }
        }
        let fresh = if is_action {
            format!("act{}", self.action_names.len())
        } else {
            format!("cond{}", self.condition_names.len())
        };
        if is_action {
            self.action_names.push(fresh.clone());
        } else {
            self.condition_names.push(fresh.clone());
        }
        fresh
    }

    fn control(&mut self, depth: usize) -> SpecNode {
        let n = self.rng.gen_range(2..=self.params.max_fanout);
        let mut sibling_leaves = BTreeSet::new();
        let children: Vec<SpecNode> =
            (0..n).map(|_| self.node(depth + 1, &mut sibling_leaves)).collect();
        match self.rng.gen_range(0..7u32) {
            0 => SpecNode::reactive_sequence(children),
            1 => SpecNode::reactive_fallback(children),
            2 => {
                let k = self.rng.gen_range(1..=n) as i64;
                SpecNode::reactive_parallel(k, children)
            }
            3 => SpecNode::sequence_with_memory(children),
            4 => SpecNode::fallback_with_memory(children),
            5 => {
                let k = self.rng.gen_range(1..=n) as i64;
                SpecNode::parallel_with_memory(k, children)
            }
            _ => {
                let key = format!("sw{}", self.switch_keys.len());
                self.switch_keys.push((key.clone(), n));
                SpecNode::switch(key, children)
            }
        }
    }

    fn decorator(&mut self, depth: usize) -> SpecNode {
        let mut sibling_leaves = BTreeSet::new();
        let child = self.node(depth + 1, &mut sibling_leaves);
        match self.rng.gen_range(0..3u32) {
            0 => SpecNode::inverter(child),
            1 => SpecNode::force(self.outcome(50), child),
            _ => SpecNode::retry_until(self.outcome(50), child),
        }
    }

    fn outcome(&mut self, success_percent: u32) -> Outcome {
        if self.rng.gen_range(0..100u32) < success_percent {
            Outcome::Success
        } else {
            Outcome::Failure
        }
    }

    fn action_script(&mut self) -> LeafScript {
        let len = self.rng.gen_range(1..=self.params.max_activations);
        let activations = (0..len)
            .map(|_| Activation {
                duration: self.rng.gen_range(0..=self.params.max_duration),
                outcome: self.outcome(55),
            })
            .collect();
        LeafScript { activations, cycle: self.rng.gen_range(0..100u32) < 90 }
    }

    fn condition_script(&mut self) -> LeafScript {
        let len = self.rng.gen_range(1..=self.params.max_activations);
        let activations =
            (0..len).map(|_| Activation { duration: 0, outcome: self.outcome(50) }).collect();
        LeafScript { activations, cycle: self.rng.gen_range(0..100u32) < 95 }
    }

    fn route_value(&mut self, n: usize) -> Value {
        let roll = self.rng.gen_range(0..100u32);
        if roll < 90 {
            Value::Int(self.rng.gen_range(0..n) as i64)
        } else if roll < 97 {
            Value::Int((n + self.rng.gen_range(0..3usize)) as i64)
        } else {
            Value::Str("oops".into())
        }
    }
}

pub fn generate_case(seed: u64, params: &CorpusParams) -> GeneratedCase {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        params,
        action_names: Vec::new(),
        condition_names: Vec::new(),
        switch_keys: Vec::new(),
    };

    let mut root_siblings = BTreeSet::new();
    let tree = g.node(0, &mut root_siblings);

    let mut scenario = ScenarioSpec {
        blackboard: Default::default(),
        updates: Vec::new(),
        leaves: Default::default(),
        max_ticks: g.rng.gen_range(5..=params.max_cycles),
    };
    for name in g.action_names.clone() {
        let script = g.action_script();
        scenario.leaves.insert(name, script);
    }
    for name in g.condition_names.clone() {
        let script = g.condition_script();
        scenario.leaves.insert(name, script);
    }

    for (key, n) in g.switch_keys.clone() {
        // A small share of switches starts unroutable on purpose.
        if g.rng.gen_range(0..100u32) < 95 {
            let value = g.route_value(n);
            scenario.blackboard.insert(key.clone(), value);
        }
        for _ in 0..g.rng.gen_range(0..=3u32) {
            let update = ScheduledUpdate {
                tick: g.rng.gen_range(0..params.max_cycles),
                key: key.clone(),
                value: g.route_value(n),
            };
            scenario.updates.push(update);
        }
    }
    for _ in 0..g.rng.gen_range(0..=2u32) {
        let update = ScheduledUpdate {
            tick: g.rng.gen_range(0..params.max_cycles),
            key: "aux".into(),
            value: Value::Int(g.rng.gen_range(-5..5i64)),
        };
        scenario.updates.push(update);
    }

    let config = RunConfig {
        max_ticks: scenario.max_ticks,
        stop_on_terminal: g.rng.gen_range(0..100u32) < 25,
        verbosity: TraceVerbosity::Full,
    };

    GeneratedCase { seed, tree, scenario, config }
}
