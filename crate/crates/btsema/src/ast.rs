//! Abstract syntax of a tree: node kinds with their attributes, source
//! positions for diagnostics, and a slot-based builder for programmatic
//! construction.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::node::Outcome;

/// 1-based source position; `0:0` marks synthetic nodes built in code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }

    pub const SYNTHETIC: Pos = Pos { line: 0, col: 0 };
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A leaf parameter value: the DSL admits integers, strings, and the two
/// terminal outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Int(i64),
    Str(String),
    Outcome(Outcome),
}

pub type Params = BTreeMap<String, AttrValue>;

#[derive(Debug, Clone, PartialEq)]
pub enum SpecKind {
    ReactiveSequence,
    ReactiveFallback,
    ReactiveParallel { threshold: i64 },
    SequenceWithMemory,
    FallbackWithMemory,
    ParallelWithMemory { threshold: i64 },
    Switch { key: String },
    Inverter,
    Force { what: Outcome },
    RetryUntil { what: Outcome },
    Action { name: String, params: Params },
    Condition { name: String, params: Params },
}

impl SpecKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            SpecKind::ReactiveSequence => "reactive-sequence",
            SpecKind::ReactiveFallback => "reactive-fallback",
            SpecKind::ReactiveParallel { .. } => "reactive-parallel",
            SpecKind::SequenceWithMemory => "sequence-with-memory",
            SpecKind::FallbackWithMemory => "fallback-with-memory",
            SpecKind::ParallelWithMemory { .. } => "parallel-with-memory",
            SpecKind::Switch { .. } => "switch",
            SpecKind::Inverter => "inverter",
            SpecKind::Force { .. } => "force",
            SpecKind::RetryUntil { .. } => "retry-until",
            SpecKind::Action { .. } => "action",
            SpecKind::Condition { .. } => "condition",
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, SpecKind::Action { .. } | SpecKind::Condition { .. })
    }

    pub fn is_decorator(&self) -> bool {
        matches!(self, SpecKind::Inverter | SpecKind::Force { .. } | SpecKind::RetryUntil { .. })
    }

    pub fn is_control(&self) -> bool {
        !self.is_leaf() && !self.is_decorator()
    }

    /// The path segment this node contributes under its parent: leaves show
    /// their declared name, inner nodes their child ordinal.
    pub fn path_segment(&self, ord: usize) -> String {
        match self {
            SpecKind::Action { name, .. } => format!("action:{name}"),
            SpecKind::Condition { name, .. } => format!("condition:{name}"),
            other => format!("{}#{ord}", other.keyword()),
        }
    }
}

/// Joins a parent path and a child segment. The root of a tree is `/`.
pub fn child_path(parent: &str, segment: &str) -> String {
    if parent == "/" {
        format!("/{segment}")
    } else {
        format!("{parent}/{segment}")
    }
}

pub const ROOT_PATH: &str = "/";

/// One node of a tree description. Equality ignores source positions.
#[derive(Debug, Clone)]
pub struct SpecNode {
    pub kind: SpecKind,
    pub pos: Pos,
    pub children: Vec<SpecNode>,
}

impl PartialEq for SpecNode {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.children == other.children
    }
}

impl SpecNode {
    pub fn new(kind: SpecKind, children: Vec<SpecNode>) -> Self {
        SpecNode { kind, pos: Pos::SYNTHETIC, children }
    }

    pub fn action(name: impl Into<String>) -> Self {
        Self::new(SpecKind::Action { name: name.into(), params: Params::new() }, vec![])
    }

    pub fn condition(name: impl Into<String>) -> Self {
        Self::new(SpecKind::Condition { name: name.into(), params: Params::new() }, vec![])
    }

    pub fn action_with_params(name: impl Into<String>, params: Params) -> Self {
        Self::new(SpecKind::Action { name: name.into(), params }, vec![])
    }

    pub fn condition_with_params(name: impl Into<String>, params: Params) -> Self {
        Self::new(SpecKind::Condition { name: name.into(), params }, vec![])
    }

    pub fn reactive_sequence(children: Vec<SpecNode>) -> Self {
        Self::new(SpecKind::ReactiveSequence, children)
    }

    pub fn reactive_fallback(children: Vec<SpecNode>) -> Self {
        Self::new(SpecKind::ReactiveFallback, children)
    }

    pub fn reactive_parallel(threshold: i64, children: Vec<SpecNode>) -> Self {
        Self::new(SpecKind::ReactiveParallel { threshold }, children)
    }

    pub fn sequence_with_memory(children: Vec<SpecNode>) -> Self {
        Self::new(SpecKind::SequenceWithMemory, children)
    }

    pub fn fallback_with_memory(children: Vec<SpecNode>) -> Self {
        Self::new(SpecKind::FallbackWithMemory, children)
    }

    pub fn parallel_with_memory(threshold: i64, children: Vec<SpecNode>) -> Self {
        Self::new(SpecKind::ParallelWithMemory { threshold }, children)
    }

    pub fn switch(key: impl Into<String>, children: Vec<SpecNode>) -> Self {
        Self::new(SpecKind::Switch { key: key.into() }, children)
    }

    pub fn inverter(child: SpecNode) -> Self {
        Self::new(SpecKind::Inverter, vec![child])
    }

    pub fn force(what: Outcome, child: SpecNode) -> Self {
        Self::new(SpecKind::Force { what }, vec![child])
    }

    pub fn retry_until(what: Outcome, child: SpecNode) -> Self {
        Self::new(SpecKind::RetryUntil { what }, vec![child])
    }

    /// Number of nodes in this subtree, itself included.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(SpecNode::node_count).sum::<usize>()
    }

    /// Pre-order walk with the path each node would get at runtime.
    pub fn visit_with_paths(&self, f: &mut dyn FnMut(&SpecNode, &str)) {
        fn walk(node: &SpecNode, path: &str, f: &mut dyn FnMut(&SpecNode, &str)) {
            f(node, path);
            for (ord, child) in node.children.iter().enumerate() {
                let p = child_path(path, &child.kind.path_segment(ord));
                walk(child, &p, f);
            }
        }
        walk(self, ROOT_PATH, f);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("control node needs at least 2 children, got {0}")]
    TooFewSlots(usize),
    #[error("expected a control kind, got '{0}'")]
    NotAControlKind(&'static str),
    #[error("child ordinal {ord} out of range for {len} slots")]
    SlotOutOfRange { ord: usize, len: usize },
    #[error("child slot(s) {0:?} were never filled")]
    EmptySlots(Vec<usize>),
}

/// Slot-based construction of a control node: allocate `n` ordered slots,
/// fill them in any order (overwriting is allowed), then `finish`. A slot
/// can never hold "nothing" once finished — unfilled slots are an error.
#[derive(Debug)]
pub struct ControlSpecBuilder {
    kind: SpecKind,
    slots: Vec<Option<SpecNode>>,
}

impl ControlSpecBuilder {
    pub fn new(kind: SpecKind, n_children: usize) -> Result<Self, BuildError> {
        if !kind.is_control() {
            return Err(BuildError::NotAControlKind(kind.keyword()));
        }
        if n_children < 2 {
            return Err(BuildError::TooFewSlots(n_children));
        }
        Ok(ControlSpecBuilder { kind, slots: (0..n_children).map(|_| None).collect() })
    }

    pub fn set_child(&mut self, ord: usize, child: SpecNode) -> Result<(), BuildError> {
        if ord >= self.slots.len() {
            return Err(BuildError::SlotOutOfRange { ord, len: self.slots.len() });
        }
        self.slots[ord] = Some(child);
        Ok(())
    }

    pub fn finish(self) -> Result<SpecNode, BuildError> {
        let empty: Vec<usize> = self
            .slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.is_none().then_some(i))
            .collect();
        if !empty.is_empty() {
            return Err(BuildError::EmptySlots(empty));
        }
        let children = self.slots.into_iter().map(Option::unwrap).collect();
        Ok(SpecNode::new(self.kind, children))
    }
}
