//! Nondeterministic Büchi automata with propositional guards.

mod dot;
pub(crate) use dot::escape;
mod hoa;
mod symbols;
mod translate;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::ltl::{AtomicPredicate, Formula, LassoWord, Symbol};

pub use dot::export_dot;
pub use hoa::{import_hoa, parse_atom_table, AtomTable, HoaError};
pub use symbols::{enumerate_feasible_symbols, first_feasible_symbol, EnumerationError, SymbolSet, MAX_SYMBOLS};
pub use translate::translate;

pub type StateId = usize;

/// States are dense indices `0..len`. At most one guard per ordered pair of
/// states; adding a second edge for the same pair ORs the guards.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Nba {
    names: Vec<String>,
    pub initial: BTreeSet<StateId>,
    pub finals: BTreeSet<StateId>,
    transitions: BTreeMap<(StateId, StateId), Formula>,
    /// Set by [`crate::decomposition::add_aux_state`].
    pub aux: Option<Aux>,
}

/// The extra start state that encodes the initial robot configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aux {
    pub state: StateId,
    /// Initial label restricted to the atoms of the original guards.
    pub label: Symbol,
}

impl Nba {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn add_transition(&mut self, src: StateId, dst: StateId, guard: Formula) {
        assert!(src < self.len() && dst < self.len(), "transition endpoint out of range");
        match self.transitions.remove(&(src, dst)) {
            Some(old) => self.transitions.insert((src, dst), Formula::or(old, guard)),
            None => self.transitions.insert((src, dst), guard),
        };
    }

    pub fn remove_transition(&mut self, src: StateId, dst: StateId) -> Option<Formula> {
        self.transitions.remove(&(src, dst))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn name(&self, q: StateId) -> &str {
        &self.names[q]
    }

    pub fn state_named(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    /// All transitions in (source, target) order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, StateId, &Formula)> {
        self.transitions.iter().map(|(&(s, d), g)| (s, d, g))
    }

    pub fn guard(&self, src: StateId, dst: StateId) -> Option<&Formula> {
        self.transitions.get(&(src, dst))
    }

    pub fn self_loop(&self, q: StateId) -> Option<&Formula> {
        self.guard(q, q)
    }

    /// Outgoing transitions of `src` in target order.
    pub fn successors(&self, src: StateId) -> impl Iterator<Item = (StateId, &Formula)> {
        self.transitions.range((src, 0)..(src + 1, 0)).map(|(&(_, d), g)| (d, g))
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals.contains(&q)
    }

    /// Atoms mentioned by any guard.
    pub fn atoms(&self) -> BTreeSet<AtomicPredicate> {
        self.transitions.values().flat_map(Formula::atoms).collect()
    }

    /// States reachable from `from` in one step on `sym`.
    pub fn step(&self, from: &BTreeSet<StateId>, sym: &Symbol) -> BTreeSet<StateId> {
        from.iter().flat_map(|&q| self.successors(q).filter(|(_, g)| g.holds(sym)).map(|(d, _)| d)).collect()
    }

    /// Büchi acceptance of a lasso word: search the product of the automaton
    /// with the folded word for a reachable cycle through a final state.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let n = w.positions();
        let succs = |(q, i): (StateId, usize)| {
            let sym = w.at(i);
            let j = w.succ(i);
            self.successors(q).filter(move |(_, g)| g.holds(sym)).map(move |(d, _)| (d, j))
        };
        let mut reach = vec![false; self.len() * n];
        let idx = |(q, i): (StateId, usize)| q * n + i;
        let mut queue: VecDeque<(StateId, usize)> = self.initial.iter().map(|&q| (q, 0)).collect();
        for &node in &queue {
            reach[idx(node)] = true;
        }
        while let Some(node) = queue.pop_front() {
            for nxt in succs(node) {
                if !reach[idx(nxt)] {
                    reach[idx(nxt)] = true;
                    queue.push_back(nxt);
                }
            }
        }
        // A final product node lies on a cycle iff it can reach itself.
        for &f in &self.finals {
            for i in 0..n {
                let start = (f, i);
                if !reach[idx(start)] {
                    continue;
                }
                let mut seen = vec![false; self.len() * n];
                let mut queue: VecDeque<_> = succs(start).collect();
                while let Some(node) = queue.pop_front() {
                    if node == start {
                        return true;
                    }
                    if !std::mem::replace(&mut seen[idx(node)], true) {
                        queue.extend(succs(node));
                    }
                }
            }
        }
        false
    }
}

/// Copy of `a` without the transitions that no feasible symbol can enable.
pub fn prune(a: &Nba) -> Nba {
    let mut out = a.clone();
    out.transitions.retain(|_, g| first_feasible_symbol(g).is_some());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn sym(names: &[&str]) -> Symbol {
        names.iter().map(|n| AtomicPredicate::region(1, *n)).collect()
    }

    fn g(text: &str) -> Formula {
        parse_ltl(text).unwrap()
    }

    fn until_automaton() -> Nba {
        let mut a = Nba::new();
        let q0 = a.add_state("q0");
        let qf = a.add_state("qF");
        a.initial.insert(q0);
        a.finals.insert(qf);
        a.add_transition(q0, q0, g("pi_1_l1"));
        a.add_transition(q0, qf, g("pi_1_l2"));
        a.add_transition(qf, qf, Formula::True);
        a
    }

    #[test]
    fn merging_parallel_edges() {
        let mut a = until_automaton();
        a.add_transition(0, 1, g("pi_1_l3"));
        assert_eq!(a.num_transitions(), 3);
        assert_eq!(a.guard(0, 1).unwrap(), &g("pi_1_l2 | pi_1_l3"));
    }

    #[test]
    fn lasso_acceptance() {
        let a = until_automaton();
        let w = LassoWord::new(vec![sym(&["l1"])], vec![sym(&["l2"])]);
        assert!(a.accepts_lasso(&w));
        let w = LassoWord::new(vec![], vec![sym(&["l1"])]);
        assert!(!a.accepts_lasso(&w));
    }

    #[test]
    fn prune_drops_infeasible_only() {
        let mut a = until_automaton();
        a.add_transition(1, 0, g("pi_1_l1 & pi_1_l2"));
        let p = prune(&a);
        assert_eq!(p.num_transitions(), 3);
        assert!(p.guard(1, 0).is_none());
        assert_eq!(prune(&p), p);
    }
}
