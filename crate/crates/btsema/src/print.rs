//! Canonical printer for tree descriptions: `parse(print(x)) == x`, and the
//! output of a print is already in canonical form.

use std::fmt::Write;

use crate::ast::{AttrValue, SpecKind, SpecNode};

/// Renders a string as a DSL token: quoted, with the five escapes the lexer
/// understands.
fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

fn attr_value(v: &AttrValue) -> String {
    match v {
        AttrValue::Int(i) => i.to_string(),
        AttrValue::Str(s) => quote(s),
        AttrValue::Outcome(o) => o.to_string().to_ascii_lowercase(),
    }
}

/// The node head: keyword, leaf name, then attributes. Leaf parameters come
/// out sorted by key.
fn head(kind: &SpecKind) -> String {
    let mut s = String::from(kind.keyword());
    match kind {
        SpecKind::ReactiveParallel { threshold } | SpecKind::ParallelWithMemory { threshold } => {
            write!(s, " :threshold {threshold}").unwrap();
        }
        SpecKind::Switch { key } => {
            write!(s, " :key {}", quote(key)).unwrap();
        }
        SpecKind::Force { what } | SpecKind::RetryUntil { what } => {
            write!(s, " :what {}", what.to_string().to_ascii_lowercase()).unwrap();
        }
        SpecKind::Action { name, params } | SpecKind::Condition { name, params } => {
            write!(s, " {name}").unwrap();
            for (k, v) in params {
                write!(s, " :{k} {}", attr_value(v)).unwrap();
            }
        }
        _ => {}
    }
    s
}

/// Canonical text form: leaves on one line, one child per line below inner
/// nodes, two-space indentation, closing paren on the last child's line.
pub fn print_tree(spec: &SpecNode) -> String {
    let mut out = String::new();
    render(spec, 0, &mut out);
    out.push('\n');
    out
}

fn render(node: &SpecNode, depth: usize, out: &mut String) {
    out.push('(');
    out.push_str(&head(&node.kind));
    for child in &node.children {
        out.push('\n');
        for _ in 0..depth + 1 {
            out.push_str("  ");
        }
        render(child, depth + 1, out);
    }
    out.push(')');
}
