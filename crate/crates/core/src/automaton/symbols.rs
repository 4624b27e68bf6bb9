use std::collections::BTreeSet;
use std::ops::ControlFlow;

use crate::ltl::{AtomicPredicate, Formula, RobotId, Symbol};

/// Upper bound on the number of symbols a single guard may expand to.
pub const MAX_SYMBOLS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("guard over {atoms} atoms has more than {limit} feasible symbols: {guard}")]
pub struct EnumerationError {
    pub atoms: usize,
    pub limit: usize,
    pub guard: String,
}

/// Feasible symbols of one guard, over the guard's own atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolSet {
    pub atoms: BTreeSet<AtomicPredicate>,
    pub symbols: Vec<Symbol>,
}

impl SymbolSet {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Symbol> {
        self.symbols.iter()
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.symbols.binary_search(s).is_ok()
    }
}

/// Every subset of the guard's atoms that satisfies it (atoms outside the
/// subset read false) and gives each robot at most one region. Sorted.
///
/// The search assigns atoms one at a time and cuts a branch as soon as the
/// partial assignment falsifies the guard, so tightly constrained guards stay
/// cheap even when they mention many atoms.
pub fn enumerate_feasible_symbols(guard: &Formula) -> Result<SymbolSet, EnumerationError> {
    let search = Search::new(guard);
    let mut symbols = Vec::new();
    let overflow = search.run(|s| {
        symbols.push(s);
        if symbols.len() > MAX_SYMBOLS {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if overflow {
        return Err(EnumerationError { atoms: search.atoms.len(), limit: MAX_SYMBOLS, guard: guard.to_string() });
    }
    symbols.sort();
    Ok(SymbolSet { atoms: search.atoms.into_iter().collect(), symbols })
}

/// Some feasible symbol satisfying the guard, if any exists.
pub fn first_feasible_symbol(guard: &Formula) -> Option<Symbol> {
    let mut found = None;
    Search::new(guard).run(|s| {
        found = Some(s);
        ControlFlow::Break(())
    });
    found
}

enum Node {
    Const(bool),
    Var(usize),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

impl Node {
    fn compile(f: &Formula, index: &dyn Fn(&AtomicPredicate) -> usize) -> Node {
        match f {
            Formula::True => Node::Const(true),
            Formula::Atom(p) => Node::Var(index(p)),
            Formula::Not(a) => Node::Not(Box::new(Node::compile(a, index))),
            Formula::And(a, b) => Node::And(vec![Node::compile(a, index), Node::compile(b, index)]),
            Formula::Or(a, b) => Node::Or(vec![Node::compile(a, index), Node::compile(b, index)]),
            Formula::Implies(a, b) => {
                Node::Or(vec![Node::Not(Box::new(Node::compile(a, index))), Node::compile(b, index)])
            }
            // Same reading as `Formula::holds`: truth on a constant word.
            Formula::Until(_, b) => Node::compile(b, index),
            Formula::Always(a) | Formula::Eventually(a) => Node::compile(a, index),
        }
    }

    /// Three-valued evaluation under a partial assignment.
    fn eval(&self, v: &[Option<bool>]) -> Option<bool> {
        match self {
            Node::Const(b) => Some(*b),
            Node::Var(i) => v[*i],
            Node::Not(a) => a.eval(v).map(|b| !b),
            Node::And(xs) => {
                let mut unknown = false;
                for x in xs {
                    match x.eval(v) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            Node::Or(xs) => {
                let mut unknown = false;
                for x in xs {
                    match x.eval(v) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
        }
    }
}

struct Search {
    atoms: Vec<AtomicPredicate>,
    root: Node,
}

impl Search {
    fn new(guard: &Formula) -> Self {
        let atoms: Vec<AtomicPredicate> = guard.atoms().into_iter().collect();
        let index = |p: &AtomicPredicate| atoms.binary_search(p).expect("atom collected above");
        let root = Node::compile(guard, &index);
        Self { atoms, root }
    }

    /// Calls `emit` per satisfying feasible symbol; returns true if `emit`
    /// stopped the search.
    fn run(&self, mut emit: impl FnMut(Symbol) -> ControlFlow<()>) -> bool {
        let mut assign = vec![None; self.atoms.len()];
        let mut taken: BTreeSet<RobotId> = BTreeSet::new();
        self.go(0, &mut assign, &mut taken, &mut emit).is_break()
    }

    fn go(
        &self,
        i: usize,
        assign: &mut Vec<Option<bool>>,
        taken: &mut BTreeSet<RobotId>,
        emit: &mut dyn FnMut(Symbol) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if self.root.eval(assign) == Some(false) {
            return ControlFlow::Continue(());
        }
        if i == self.atoms.len() {
            let s = self.atoms.iter().zip(assign.iter()).filter(|(_, v)| **v == Some(true)).map(|(a, _)| a.clone());
            return emit(s.collect());
        }
        assign[i] = Some(false);
        self.go(i + 1, assign, taken, emit)?;
        let atom = &self.atoms[i];
        let region = !atom.is_obstacle();
        if !(region && taken.contains(&atom.robot)) {
            assign[i] = Some(true);
            if region {
                taken.insert(atom.robot);
            }
            let r = self.go(i + 1, assign, taken, emit);
            if region {
                taken.remove(&atom.robot);
            }
            r?;
        }
        assign[i] = None;
        ControlFlow::Continue(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn set(text: &str) -> Vec<String> {
        enumerate_feasible_symbols(&parse_ltl(text).unwrap()).unwrap().iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn either_region_but_not_both() {
        // Robot j = 1 with regions e, m; robot i = 2.
        assert_eq!(set("(pi_1_e | pi_1_m) & !pi_2_e"), ["{pi_1_e}", "{pi_1_m}"]);
    }

    #[test]
    fn negation_only_gives_the_empty_symbol() {
        assert_eq!(set("!pi_2_e"), ["{}"]);
    }

    #[test]
    fn two_regions_at_once_is_infeasible() {
        assert!(set("pi_1_l1 & pi_1_l2").is_empty());
        assert!(first_feasible_symbol(&parse_ltl("pi_1_l1 & pi_1_l2").unwrap()).is_none());
    }

    #[test]
    fn large_cube_is_cheap() {
        let text = (1..=60).map(|j| format!("pi_{j}_A")).collect::<Vec<_>>().join(" & ");
        let s = enumerate_feasible_symbols(&parse_ltl(&text).unwrap()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.atoms.len(), 60);
    }

    #[test]
    fn blowup_is_refused() {
        let text = (1..=17).map(|j| format!("!pi_{j}_A")).collect::<Vec<_>>().join(" | ");
        let err = enumerate_feasible_symbols(&parse_ltl(&text).unwrap()).unwrap_err();
        assert_eq!(err.atoms, 17);
    }
}
