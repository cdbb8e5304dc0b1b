//! Well-formedness checking and instantiation of runtime trees.
//!
//! A tree description is well formed when every leaf stands alone, every
//! decorator wraps exactly one subtree, every control node composes at least
//! two, and parallel thresholds fit their child counts. Validation walks the
//! whole description and reports every violation, each with the node's path
//! and source position.

use thiserror::Error;

use crate::ast::{child_path, Params, Pos, SpecKind, SpecNode, ROOT_PATH};
use crate::control::{
    FallbackWithMemory, ParallelWithMemory, ReactiveFallback, ReactiveParallel, ReactiveSequence,
    SequenceWithMemory, Switch,
};
use crate::decorator::{Force, Inverter, RetryUntil};
use crate::leaf::{ActionNode, ConditionNode, Plugin};
use crate::node::{NodeBody, TreeNode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{pos}: {path}: '{kind}' has {actual} children, control nodes need at least 2")]
    TooFewChildren { pos: Pos, path: String, kind: &'static str, actual: usize },
    #[error("{pos}: {path}: '{kind}' has {actual} children, decorators take exactly 1")]
    DecoratorArity { pos: Pos, path: String, kind: &'static str, actual: usize },
    #[error("{pos}: {path}: leaf '{name}' cannot have children ({actual} given)")]
    LeafWithChildren { pos: Pos, path: String, name: String, actual: usize },
    #[error("{pos}: {path}: threshold {threshold} outside 1..={n}")]
    ThresholdOutOfRange { pos: Pos, path: String, threshold: i64, n: usize },
}

impl ValidationError {
    pub fn pos(&self) -> Pos {
        match self {
            ValidationError::TooFewChildren { pos, .. }
            | ValidationError::DecoratorArity { pos, .. }
            | ValidationError::LeafWithChildren { pos, .. }
            | ValidationError::ThresholdOutOfRange { pos, .. } => *pos,
        }
    }
}

/// A tree description that passed validation. The only way to obtain a
/// runtime [`TreeNode`] tree.
#[derive(Debug, Clone, PartialEq)]
pub struct WellFormedTree {
    spec: SpecNode,
}

impl WellFormedTree {
    /// Checks the whole description and takes ownership of it when no rule
    /// is violated; otherwise returns every violation found.
    pub fn validate(spec: SpecNode) -> Result<WellFormedTree, Vec<ValidationError>> {
        let mut errors = Vec::new();
        check(&spec, ROOT_PATH, &mut errors);
        if errors.is_empty() {
            Ok(WellFormedTree { spec })
        } else {
            Err(errors)
        }
    }

    pub fn spec(&self) -> &SpecNode {
        &self.spec
    }

    pub fn into_spec(self) -> SpecNode {
        self.spec
    }

    /// Builds the runtime tree, asking `plugins` for the component behind
    /// each leaf. Leaves are visited in pre-order.
    pub fn instantiate(&self, plugins: &mut PluginFactory<'_>) -> Result<TreeNode, PluginSetupError> {
        build(&self.spec, ROOT_PATH.to_owned(), plugins)
    }
}

/// Supplies the functional component behind a leaf, or a reason it cannot.
pub type PluginFactory<'a> = dyn FnMut(&LeafDecl<'_>) -> Result<Box<dyn Plugin>, String> + 'a;

/// What a plugin factory learns about the leaf it is supplying.
#[derive(Debug)]
pub struct LeafDecl<'a> {
    pub kind: LeafKind,
    pub name: &'a str,
    pub path: &'a str,
    pub params: &'a Params,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafKind {
    Action,
    Condition,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: no plugin available: {message}")]
pub struct PluginSetupError {
    pub path: String,
    pub message: String,
}

fn check(node: &SpecNode, path: &str, errors: &mut Vec<ValidationError>) {
    let n = node.children.len();
    match &node.kind {
        SpecKind::Action { name, .. } | SpecKind::Condition { name, .. } => {
            if n != 0 {
                errors.push(ValidationError::LeafWithChildren {
                    pos: node.pos,
                    path: path.to_owned(),
                    name: name.clone(),
                    actual: n,
                });
            }
        }
        kind if kind.is_decorator() => {
            if n != 1 {
                errors.push(ValidationError::DecoratorArity {
                    pos: node.pos,
                    path: path.to_owned(),
                    kind: kind.keyword(),
                    actual: n,
                });
            }
        }
        kind => {
            if n < 2 {
                errors.push(ValidationError::TooFewChildren {
                    pos: node.pos,
                    path: path.to_owned(),
                    kind: kind.keyword(),
                    actual: n,
                });
            }
            if let SpecKind::ReactiveParallel { threshold }
            | SpecKind::ParallelWithMemory { threshold } = kind
            {
                if *threshold < 1 || *threshold > n as i64 {
                    errors.push(ValidationError::ThresholdOutOfRange {
                        pos: node.pos,
                        path: path.to_owned(),
                        threshold: *threshold,
                        n,
                    });
                }
            }
        }
    }
    for (ord, child) in node.children.iter().enumerate() {
        let p = child_path(path, &child.kind.path_segment(ord));
        check(child, &p, errors);
    }
}

fn build(
    node: &SpecNode,
    path: String,
    plugins: &mut PluginFactory<'_>,
) -> Result<TreeNode, PluginSetupError> {
    let mut children = Vec::with_capacity(node.children.len());
    for (ord, child) in node.children.iter().enumerate() {
        let p = child_path(&path, &child.kind.path_segment(ord));
        children.push(build(child, p, plugins)?);
    }
    let body = match &node.kind {
        SpecKind::Action { name, params } => {
            let decl = LeafDecl { kind: LeafKind::Action, name, path: &path, params };
            let plugin = plugins(&decl)
                .map_err(|message| PluginSetupError { path: path.clone(), message })?;
            NodeBody::Action(ActionNode::new(name.clone(), plugin))
        }
        SpecKind::Condition { name, params } => {
            let decl = LeafDecl { kind: LeafKind::Condition, name, path: &path, params };
            let plugin = plugins(&decl)
                .map_err(|message| PluginSetupError { path: path.clone(), message })?;
            NodeBody::Condition(ConditionNode::new(name.clone(), plugin))
        }
        SpecKind::ReactiveSequence => NodeBody::ReactiveSequence(ReactiveSequence::new(children)),
        SpecKind::ReactiveFallback => NodeBody::ReactiveFallback(ReactiveFallback::new(children)),
        SpecKind::ReactiveParallel { threshold } => {
            NodeBody::ReactiveParallel(ReactiveParallel::new(*threshold as usize, children))
        }
        SpecKind::SequenceWithMemory => {
            NodeBody::SequenceWithMemory(SequenceWithMemory::new(children))
        }
        SpecKind::FallbackWithMemory => {
            NodeBody::FallbackWithMemory(FallbackWithMemory::new(children))
        }
        SpecKind::ParallelWithMemory { threshold } => {
            NodeBody::ParallelWithMemory(ParallelWithMemory::new(*threshold as usize, children))
        }
        SpecKind::Switch { key } => NodeBody::Switch(Switch::new(key.clone(), children)),
        SpecKind::Inverter => NodeBody::Inverter(Inverter::new(one(children))),
        SpecKind::Force { what } => NodeBody::Force(Force::new(*what, one(children))),
        SpecKind::RetryUntil { what } => NodeBody::RetryUntil(RetryUntil::new(*what, one(children))),
    };
    Ok(TreeNode::new(path, body))
}

fn one(mut children: Vec<TreeNode>) -> TreeNode {
    debug_assert_eq!(children.len(), 1);
    children.pop().expect("validated decorator has one child")
}
