use std::fmt::Write;

use super::DecompGraph;
use crate::automaton::escape;
use crate::ltl::Symbol;

/// Graphviz rendering: node labels carry the distance, accepting edges are
/// dashed.
pub fn export_graph_dot(g: &DecompGraph) -> String {
    let mut out = String::from("digraph decomposition {\n  rankdir=LR;\n  node [shape=circle];\n");
    for &q in &g.nodes {
        let shape = if g.vf.contains(&q) { ", shape=doublecircle" } else { "" };
        let label = escape(&format!("{}\\nd={}", g.name(q), g.distance(q)));
        let _ = writeln!(out, "  n{q} [label=\"{label}\"{shape}];");
    }
    for e in g.edges.values() {
        let run = e.representative();
        let style = if e.accepting { ", style=dashed" } else { "" };
        let _ = writeln!(out, "  n{} -> n{} [label=\"K={}\"{style}];", e.source, e.target, run.run.hops());
    }
    out.push_str("}\n");
    out
}

fn symbols(list: &[Symbol]) -> String {
    list.iter().map(Symbol::to_string).collect::<Vec<_>>().join(";")
}

/// Line-oriented dump with a fixed field order. Each line starts with its
/// record kind:
///
/// ```text
/// decomp-graph v1
/// node <id> name="<name>" dist=<n|inf> vf=<0|1> final=<0|1> aux=<0|1>
/// loop <id> symbols=<sym>;<sym>..
/// edge <src> <dst> accepting=<0|1> runs=<n> assignments=<n>
/// run <src> <dst> <index> k=<K> accepting=<0|1> states=<id>,<id>.. guard=<formula>
/// assign <src> <dst> run=<index> symbol=<sym> goals=<robot>:<goal>,.. for=<sym>;<sym>..
/// ```
///
/// A goal is a region name, `free`, or `free!r1!r2` to stay out of r1 and r2.
pub fn export_graph_text(g: &DecompGraph) -> String {
    let mut out = String::from("decomp-graph v1\n");
    let flag = |b: bool| u8::from(b);
    for &q in &g.nodes {
        let _ = writeln!(
            out,
            "node {q} name=\"{}\" dist={} vf={} final={} aux={}",
            escape(g.name(q)),
            g.distance(q),
            flag(g.vf.contains(&q)),
            flag(g.nba.is_final(q)),
            flag(q == g.aux)
        );
    }
    for (q, set) in &g.loop_symbols {
        let _ = writeln!(out, "loop {q} symbols={}", symbols(&set.symbols));
    }
    for e in g.edges.values() {
        let (s, d) = (e.source, e.target);
        let _ = writeln!(
            out,
            "edge {s} {d} accepting={} runs={} assignments={}",
            flag(e.accepting),
            e.runs.len(),
            e.assignments.len()
        );
        for (i, r) in e.runs.iter().enumerate() {
            let states: Vec<String> = r.run.states.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(
                out,
                "run {s} {d} {i} k={} accepting={} states={} guard={}",
                r.run.hops(),
                flag(r.accepting),
                states.join(","),
                r.guard
            );
        }
        for a in &e.assignments {
            let goals: Vec<String> = a.goals.iter().map(|(j, goal)| format!("{j}:{goal}")).collect();
            let _ = writeln!(
                out,
                "assign {s} {d} run={} symbol={} goals={} for={}",
                a.run,
                a.symbol,
                goals.join(","),
                symbols(&a.admissible_for)
            );
        }
    }
    out
}
