mod common;

use proptest::prelude::*;
use reactive_ltl::automaton::{enumerate_feasible_symbols, first_feasible_symbol, prune, translate};
use reactive_ltl::ltl::{Formula, Symbol};

/// Every subset of the formula's atoms, filtered by brute force.
fn brute_force(f: &Formula) -> Vec<Symbol> {
    let atoms: Vec<_> = f.atoms().into_iter().collect();
    assert!(atoms.len() <= 12);
    let mut out: Vec<Symbol> = (0u32..1 << atoms.len())
        .map(|m| (0..atoms.len()).filter(|i| m & (1 << i) != 0).map(|i| atoms[i].clone()).collect::<Symbol>())
        .filter(|s| s.is_feasible() && f.holds(s))
        .collect();
    out.sort();
    out
}

fn propositional() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        1 => Just(Formula::True),
        6 => proptest::sample::select(common::atoms()).prop_map(Formula::Atom),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn enumeration_matches_brute_force(f in propositional()) {
        let got = enumerate_feasible_symbols(&f).unwrap();
        prop_assert_eq!(&got.symbols, &brute_force(&f));
        prop_assert_eq!(first_feasible_symbol(&f).is_some(), !got.is_empty());
    }

    /// Pruning removes exactly the transitions no feasible symbol enables.
    #[test]
    fn pruning_is_exact(f in common::formula(3)) {
        let a = translate(&f);
        let p = prune(&a);
        for (s, d, g) in a.transitions() {
            let kept = p.guard(s, d).is_some();
            prop_assert_eq!(kept, !brute_force(g).is_empty(), "guard {}", g);
        }
    }
}
