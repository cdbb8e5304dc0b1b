//! Graphviz DOT export of a tree description. Nodes are labeled with their
//! kind and attributes; edges follow child order. Output is deterministic.

use std::fmt::Write;

use crate::ast::{AttrValue, SpecKind, SpecNode};

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn label(kind: &SpecKind) -> String {
    let mut s = String::from(kind.keyword());
    match kind {
        SpecKind::ReactiveParallel { threshold } | SpecKind::ParallelWithMemory { threshold } => {
            write!(s, " k={threshold}").unwrap();
        }
        SpecKind::Switch { key } => {
            write!(s, " key=\"{key}\"").unwrap();
        }
        SpecKind::Force { what } | SpecKind::RetryUntil { what } => {
            write!(s, " what={}", what.to_string().to_ascii_lowercase()).unwrap();
        }
        SpecKind::Action { name, params } | SpecKind::Condition { name, params } => {
            write!(s, " {name}").unwrap();
            for (k, v) in params {
                match v {
                    AttrValue::Int(i) => write!(s, " {k}={i}").unwrap(),
                    AttrValue::Str(v) => write!(s, " {k}=\"{v}\"").unwrap(),
                    AttrValue::Outcome(o) => {
                        write!(s, " {k}={}", o.to_string().to_ascii_lowercase()).unwrap()
                    }
                }
            }
        }
        _ => {}
    }
    s
}

pub fn export_dot(spec: &SpecNode) -> String {
    let mut nodes = String::new();
    let mut edges = String::new();
    let mut next_id = 0usize;
    fn walk(node: &SpecNode, id: usize, next_id: &mut usize, nodes: &mut String, edges: &mut String) {
        writeln!(nodes, "  n{id} [label=\"{}\"];", dot_escape(&label(&node.kind))).unwrap();
        for child in &node.children {
            *next_id += 1;
            let child_id = *next_id;
            writeln!(edges, "  n{id} -> n{child_id};").unwrap();
            walk(child, child_id, next_id, nodes, edges);
        }
    }
    walk(spec, 0, &mut next_id, &mut nodes, &mut edges);
    format!("digraph behavior_tree {{\n  node [shape=box];\n{nodes}{edges}}}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf_makes_a_one_node_graph() {
        let dot = export_dot(&SpecNode::action("A"));
        assert_eq!(dot, "digraph behavior_tree {\n  node [shape=box];\n  n0 [label=\"action A\"];\n}\n");
    }

    #[test]
    fn edges_preserve_child_order() {
        let spec = SpecNode::reactive_parallel(
            2,
            vec![SpecNode::action("A"), SpecNode::action("B"), SpecNode::condition("C")],
        );
        let dot = export_dot(&spec);
        assert!(dot.contains("n0 [label=\"reactive-parallel k=2\"]"));
        let a = dot.find("n0 -> n1;").unwrap();
        let b = dot.find("n0 -> n2;").unwrap();
        let c = dot.find("n0 -> n3;").unwrap();
        assert!(a < b && b < c);
    }

    #[test]
    fn export_is_deterministic() {
        let spec = SpecNode::switch("route", vec![SpecNode::action("A"), SpecNode::action("B")]);
        assert_eq!(export_dot(&spec), export_dot(&spec.clone()));
    }
}
