//! The JSON scenario format: initial blackboard, timed blackboard updates,
//! and the per-leaf activation scripts that drive scripted plugins.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{SpecKind, SpecNode};
use crate::node::Outcome;
use crate::value::Value;

/// One scripted run of a leaf's component: how many cycles it takes and how
/// it ends. Duration 0 completes synchronously inside `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Activation {
    pub duration: u32,
    pub outcome: Outcome,
}

/// The activation list for one leaf name. With `cycle` (the default) the
/// list repeats forever; without it, running past the end is a runtime
/// error, so script underruns surface instead of inventing outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafScript {
    pub activations: Vec<Activation>,
    #[serde(default = "default_cycle")]
    pub cycle: bool,
}

fn default_cycle() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledUpdate {
    pub tick: u64,
    pub key: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub blackboard: BTreeMap<String, Value>,
    #[serde(default)]
    pub updates: Vec<ScheduledUpdate>,
    #[serde(default)]
    pub leaves: BTreeMap<String, LeafScript>,
    pub max_ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{location}: {message}")]
    Schema { location: String, message: String },
}

/// Parses and shape-checks a scenario. Violations carry JSON-pointer-style
/// locations.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ScenarioSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        ScenarioError::Schema {
            location: pointer_of(e.path()),
            message: e.inner().to_string(),
        }
    })?;
    if spec.max_ticks < 1 {
        return Err(ScenarioError::Schema {
            location: "/max_ticks".into(),
            message: "must be at least 1".into(),
        });
    }
    for (name, script) in &spec.leaves {
        if script.activations.is_empty() {
            return Err(ScenarioError::Schema {
                location: format!("/leaves/{name}/activations"),
                message: "must not be empty".into(),
            });
        }
    }
    Ok(spec)
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for segment in path.iter() {
        use serde_path_to_error::Segment;
        match segment {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrossCheckError {
    #[error("{path}: leaf '{name}' has no script in the scenario")]
    MissingScript { name: String, path: String },
    #[error("/leaves/{name}: script does not match any leaf in the tree")]
    UnknownLeaf { name: String },
    #[error("/leaves/{name}/activations/{index}/duration: condition scripts must be instantaneous (duration 0, got {duration})")]
    ConditionNotInstant { name: String, index: usize, duration: u32 },
}

impl ScenarioSpec {
    /// Checks this scenario against a tree description: every leaf must have
    /// a script, every script must belong to a leaf, and condition scripts
    /// must complete within their tick.
    pub fn cross_check(&self, tree: &SpecNode) -> Result<(), Vec<CrossCheckError>> {
        let mut errors = Vec::new();
        let mut tree_leaves: BTreeSet<String> = BTreeSet::new();
        let mut condition_names: BTreeSet<String> = BTreeSet::new();
        tree.visit_with_paths(&mut |node, path| match &node.kind {
            SpecKind::Action { name, .. } => {
                tree_leaves.insert(name.clone());
                if !self.leaves.contains_key(name) {
                    errors.push(CrossCheckError::MissingScript {
                        name: name.clone(),
                        path: path.to_owned(),
                    });
                }
            }
            SpecKind::Condition { name, .. } => {
                tree_leaves.insert(name.clone());
                condition_names.insert(name.clone());
                if !self.leaves.contains_key(name) {
                    errors.push(CrossCheckError::MissingScript {
                        name: name.clone(),
                        path: path.to_owned(),
                    });
                }
            }
            _ => {}
        });
        for (name, script) in &self.leaves {
            if !tree_leaves.contains(name) {
                errors.push(CrossCheckError::UnknownLeaf { name: name.clone() });
            }
            if condition_names.contains(name) {
                for (index, activation) in script.activations.iter().enumerate() {
                    if activation.duration != 0 {
                        errors.push(CrossCheckError::ConditionNotInstant {
                            name: name.clone(),
                            index,
                            duration: activation.duration,
                        });
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::SpecNode;

    fn minimal(leaves: &[(&str, &[(u32, Outcome)])]) -> ScenarioSpec {
        ScenarioSpec {
            blackboard: BTreeMap::new(),
            updates: vec![],
            leaves: leaves
                .iter()
                .map(|(name, acts)| {
                    (
                        name.to_string(),
                        LeafScript {
                            activations: acts
                                .iter()
                                .map(|&(duration, outcome)| Activation { duration, outcome })
                                .collect(),
                            cycle: true,
                        },
                    )
                })
                .collect(),
            max_ticks: 5,
        }
    }

    #[test]
    fn parses_the_documented_shape() {
        let spec = parse_scenario(
            r#"{
                "blackboard": {"route": 0, "poi": "PoI 1"},
                "updates": [{"tick": 3, "key": "route", "value": 1}],
                "leaves": {"Go": {"activations": [{"duration": 2, "outcome": "SUCCESS"}]}},
                "max_ticks": 12
            }"#,
        )
        .unwrap();
        assert_eq!(spec.blackboard.get("route"), Some(&Value::Int(0)));
        assert_eq!(spec.updates[0].key, "route");
        let go = &spec.leaves["Go"];
        assert!(go.cycle, "cycle defaults to true");
        assert_eq!(go.activations[0], Activation { duration: 2, outcome: Outcome::Success });
    }

    #[test]
    fn schema_violations_carry_pointer_locations() {
        let e = parse_scenario(
            r#"{"leaves": {"Go": {"activations": [{"duration": -1, "outcome": "SUCCESS"}]}}, "max_ticks": 3}"#,
        )
        .unwrap_err();
        let ScenarioError::Schema { location, .. } = e;
        assert_eq!(location, "/leaves/Go/activations/0/duration");

        let e = parse_scenario(r#"{"max_ticks": 0}"#).unwrap_err();
        let ScenarioError::Schema { location, .. } = e;
        assert_eq!(location, "/max_ticks");
    }

    #[test]
    fn cross_check_rejects_durative_condition_scripts() {
        let tree = SpecNode::reactive_sequence(vec![
            SpecNode::condition("Check"),
            SpecNode::action("Go"),
        ]);
        let scenario = minimal(&[
            ("Check", &[(2, Outcome::Success)]),
            ("Go", &[(0, Outcome::Success)]),
        ]);
        let errors = scenario.cross_check(&tree).unwrap_err();
        assert_eq!(
            errors,
            vec![CrossCheckError::ConditionNotInstant { name: "Check".into(), index: 0, duration: 2 }]
        );
    }

    #[test]
    fn cross_check_flags_missing_and_unknown_scripts() {
        let tree = SpecNode::reactive_sequence(vec![
            SpecNode::action("Known"),
            SpecNode::action("Unscripted"),
        ]);
        let scenario = minimal(&[
            ("Known", &[(0, Outcome::Success)]),
            ("Ghost", &[(0, Outcome::Success)]),
        ]);
        let errors = scenario.cross_check(&tree).unwrap_err();
        assert_eq!(errors.len(), 2);
        assert!(errors.iter().any(|e| matches!(e, CrossCheckError::MissingScript { name, .. } if name == "Unscripted")));
        assert!(errors.iter().any(|e| matches!(e, CrossCheckError::UnknownLeaf { name } if name == "Ghost")));
    }

    #[test]
    fn empty_activation_lists_are_rejected() {
        let e = parse_scenario(r#"{"leaves": {"Go": {"activations": []}}, "max_ticks": 3}"#)
            .unwrap_err();
        let ScenarioError::Schema { location, .. } = e;
        assert_eq!(location, "/leaves/Go/activations");
    }
}
