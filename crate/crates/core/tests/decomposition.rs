mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use reactive_ltl::automaton::{prune, translate};
use reactive_ltl::decomposition::{add_aux_state, build_graph, export_graph_text, Config, DecompGraph, Distance, Goal};
use reactive_ltl::ltl::{Formula, Symbol};

fn graph_for(f: &Formula, init: &Symbol) -> DecompGraph {
    let a = add_aux_state(&prune(&translate(f)), init);
    build_graph(&a, &Config::default()).unwrap()
}

fn initial_symbol() -> impl Strategy<Value = Symbol> {
    any::<u64>().prop_map(|seed| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let atoms: Vec<_> = common::atoms().into_iter().filter(|p| !p.is_obstacle()).collect();
        common::structured_symbol(&mut rng, &atoms)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    /// Holding an assignment's symbol drives the automaton along the run and
    /// then keeps it in the target.
    #[test]
    fn assignments_enable_their_runs(f in common::formula(3), init in initial_symbol()) {
        let g = graph_for(&f, &init);
        for e in g.edges.values() {
            for a in &e.assignments {
                let run = &e.runs[a.run].run;
                prop_assert_eq!(run.states[0], e.source);
                prop_assert_eq!(*run.states.last().unwrap(), e.target);
                prop_assert!(a.symbol.is_feasible() && !a.symbol.has_obstacle());
                let mut reach = BTreeSet::from([e.source]);
                for &q in &run.states[1..] {
                    reach = g.nba.step(&reach, &a.symbol);
                    prop_assert!(reach.contains(&q), "{} does not reach {} on {}", g.name(e.source), g.name(q), a.symbol);
                }
                prop_assert!(g.nba.step(&BTreeSet::from([e.target]), &a.symbol).contains(&e.target));
                for q in run.intermediates() {
                    prop_assert!(!g.nba.self_loop(*q).is_some_and(|l| l.holds(&a.symbol)));
                }
                for (j, goal) in &a.goals {
                    prop_assert!(goal.satisfied_by(a.symbol.region_of(*j)));
                    if let Goal::Region(r) = goal {
                        prop_assert_eq!(a.symbol.region_of(*j), Some(r.as_str()));
                    }
                }
                let loops = &g.loop_symbols[&e.source];
                prop_assert!(a.admissible_for.iter().all(|s| loops.contains(s)));
            }
            let accepting = e.runs.iter().any(|r| r.run.states.iter().any(|&q| g.nba.is_final(q)));
            prop_assert_eq!(e.accepting, accepting);
        }
    }

    /// d is zero exactly on V_F and otherwise one more than the best successor.
    #[test]
    fn distances_are_hop_counts(f in common::formula(3), init in initial_symbol()) {
        let g = graph_for(&f, &init);
        for &v in &g.nodes {
            let best = g.out_edges(v).filter_map(|e| g.distance(e.target).finite()).min();
            match g.distance(v) {
                Distance::Finite(0) => prop_assert!(g.vf.contains(&v)),
                Distance::Finite(d) => {
                    prop_assert!(!g.vf.contains(&v));
                    prop_assert_eq!(best, Some(d - 1));
                }
                Distance::Unreachable => prop_assert!(best.is_none() && !g.vf.contains(&v)),
            }
            prop_assert_eq!(g.vf.contains(&v), g.out_edges(v).any(|e| e.accepting));
        }
        prop_assert!(g.nodes.contains(&g.aux));
        for e in g.edges.values() {
            prop_assert!(g.nodes.contains(&e.source) && g.nodes.contains(&e.target));
        }
    }

    #[test]
    fn construction_is_deterministic(f in common::formula(3), init in initial_symbol()) {
        prop_assert_eq!(export_graph_text(&graph_for(&f, &init)), export_graph_text(&graph_for(&f, &init)));
    }
}

/// Single-robot missions over disjoint regions never need two regions at
/// once, so every pruned transition whose target can hold is usable: the
/// graph reaches the accepting nodes whenever the mission is satisfiable by
/// a visit sequence.
#[test]
fn single_robot_missions_connect() {
    for text in [
        "G F pi_1_l1 & G F pi_1_l2",
        "F (pi_1_l1 & F pi_1_l2) & G !pi_1_O",
        "F pi_1_l4 & F pi_1_r1 & F (pi_1_r2 | pi_1_r5) & F (pi_1_r6 | pi_1_r4) & F (pi_1_r7 | pi_1_r5) & (!pi_1_r1 U pi_1_r3) & G !pi_1_O",
        "G F (pi_1_l6 | pi_1_l3) & G F pi_1_l1 & F pi_1_l2 & F (pi_1_l5 | pi_1_l4) & F pi_1_l8 & F pi_1_l9 & (!pi_1_l2 U (pi_1_l5 | pi_1_l4)) & G !pi_1_O",
    ] {
        let f = reactive_ltl::ltl::parse_ltl(text).unwrap();
        let g = graph_for(&f, &Symbol::empty());
        assert!(g.is_connected(), "{text}");
    }
}
