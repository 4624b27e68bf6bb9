use std::fmt::Write;

use super::Nba;

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Final states are double circles, guards label edges.
pub fn export_dot(a: &Nba) -> String {
    let mut out = String::from("digraph nba {\n  rankdir=LR;\n  node [shape=circle];\n");
    for q in a.states() {
        let shape = if a.is_final(q) { ", shape=doublecircle" } else { "" };
        let _ = writeln!(out, "  s{q} [label=\"{}\"{shape}];", escape(a.name(q)));
    }
    for &q in &a.initial {
        let _ = writeln!(out, "  init{q} [shape=point, label=\"\"];\n  init{q} -> s{q};");
    }
    for (s, d, g) in a.transitions() {
        let _ = writeln!(out, "  s{s} -> s{d} [label=\"{}\"];", escape(&g.to_string()));
    }
    out.push_str("}\n");
    out
}
