//! Tableau translation from LTL to a Büchi automaton.
//!
//! A state is a set of obligations: formulas that must hold from the current
//! position on. Expanding a state in the style of Gerth, Peled, Vardi and
//! Wolper yields branches, each a cube of literals to read now, the
//! obligations left for the next position, and the untils it postponed.
//! Branches into the same successor are merged into one disjunctive guard,
//! which keeps the automata close to what ltl2ba-like tools print.
//!
//! Acceptance is generalized, one set per until: a branch is in the set for
//! `a U b` unless it postponed `a U b`. A level counter turns this into plain
//! Büchi acceptance; the final states are the ones at the top level.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::Nba;
use crate::ltl::{to_nnf, AtomicPredicate, Formula};

type Id = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(AtomicPredicate, bool),
    And(Id, Id),
    Or(Id, Id),
    Until(Id, Id),
    Release(Id, Id),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
    entailed: RefCell<HashMap<(Id, Id), bool>>,
}

impl Arena {
    fn intern(&mut self, n: Node) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    fn node(&self, id: Id) -> &Node {
        &self.nodes[id as usize]
    }

    fn tt(&mut self) -> Id {
        self.intern(Node::True)
    }

    fn ff(&mut self) -> Id {
        self.intern(Node::False)
    }

    fn and(&mut self, a: Id, b: Id) -> Id {
        match (self.node(a), self.node(b)) {
            (Node::False, _) | (_, Node::False) => self.ff(),
            (Node::True, _) => b,
            (_, Node::True) => a,
            _ if a == b => a,
            _ => self.intern(Node::And(a, b)),
        }
    }

    fn or(&mut self, a: Id, b: Id) -> Id {
        match (self.node(a), self.node(b)) {
            (Node::True, _) | (_, Node::True) => self.tt(),
            (Node::False, _) => b,
            (_, Node::False) => a,
            _ if a == b => a,
            _ => {
                // (b U (a & b)) | G b is how to_nnf spells a R b.
                if let Some(r) = self.release_pattern(a, b) {
                    return r;
                }
                self.intern(Node::Or(a, b))
            }
        }
    }

    fn release_pattern(&mut self, x: Id, y: Id) -> Option<Id> {
        let (&Node::Until(b, ab), &Node::Release(f, b2)) = (self.node(x), self.node(y)) else {
            return None;
        };
        let &Node::And(a, b3) = self.node(ab) else {
            return None;
        };
        if *self.node(f) == Node::False && b == b2 && b == b3 {
            Some(self.release(a, b))
        } else {
            None
        }
    }

    fn until(&mut self, a: Id, b: Id) -> Id {
        match self.node(b) {
            Node::True | Node::False => b,
            _ => self.intern(Node::Until(a, b)),
        }
    }

    fn release(&mut self, a: Id, b: Id) -> Id {
        match self.node(b) {
            Node::True | Node::False => b,
            _ => self.intern(Node::Release(a, b)),
        }
    }

    /// Input must be in the normal form produced by `to_nnf`.
    fn lower(&mut self, f: &Formula) -> Id {
        match f {
            Formula::True => self.tt(),
            x if x.is_false() => self.ff(),
            Formula::Atom(p) => self.intern(Node::Lit(p.clone(), true)),
            Formula::Not(inner) => match &**inner {
                Formula::Atom(p) => self.intern(Node::Lit(p.clone(), false)),
                other => unreachable!("not in negation normal form: !{other}"),
            },
            Formula::And(a, b) => {
                let (a, b) = (self.lower(a), self.lower(b));
                self.and(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.lower(a), self.lower(b));
                self.or(a, b)
            }
            Formula::Until(a, b) => {
                let (a, b) = (self.lower(a), self.lower(b));
                self.until(a, b)
            }
            Formula::Always(a) => {
                let (f, a) = (self.ff(), self.lower(a));
                self.release(f, a)
            }
            Formula::Eventually(_) | Formula::Implies(..) => unreachable!("expanded by to_nnf"),
        }
    }

    /// Sound syntactic entailment `x ⊨ y`; incomplete by design.
    fn implies(&self, x: Id, y: Id) -> bool {
        if x == y {
            return true;
        }
        if let Some(&v) = self.entailed.borrow().get(&(x, y)) {
            return v;
        }
        let v = self.entails(x, y);
        self.entailed.borrow_mut().insert((x, y), v);
        v
    }

    fn entails(&self, x: Id, y: Id) -> bool {
        match (self.node(x), self.node(y)) {
            (_, Node::True) | (Node::False, _) => return true,
            (_, &Node::And(a, b)) if self.implies(x, a) && self.implies(x, b) => return true,
            (_, &Node::Or(a, b)) if self.implies(x, a) || self.implies(x, b) => return true,
            _ => {}
        }
        match *self.node(x) {
            Node::And(a, b) => self.implies(a, y) || self.implies(b, y),
            Node::Or(a, b) => self.implies(a, y) && self.implies(b, y),
            Node::Release(a, b) => {
                self.implies(b, y)
                    || matches!(*self.node(y), Node::Release(c, d) if self.implies(a, c) && self.implies(b, d))
            }
            Node::Until(a, b) => {
                matches!(*self.node(y), Node::Until(c, d) if self.implies(a, c) && self.implies(b, d))
                    || matches!(*self.node(y), Node::Until(_, d) if self.implies(x, d))
            }
            _ => matches!(*self.node(y), Node::Until(_, d) if self.implies(x, d)),
        }
    }

    /// Split conjunctions and drop obligations implied by others;
    /// deterministic for ties.
    fn reduce(&self, set: &BTreeSet<Id>) -> BTreeSet<Id> {
        let mut flat = BTreeSet::new();
        let mut stack: Vec<Id> = set.iter().copied().collect();
        while let Some(f) = stack.pop() {
            match *self.node(f) {
                Node::And(a, b) => stack.extend([a, b]),
                Node::True => {}
                _ => {
                    flat.insert(f);
                }
            }
        }
        let mut out = flat.clone();
        for f in flat {
            if out.contains(&f) && out.iter().any(|&g| g != f && self.implies(g, f)) {
                out.remove(&f);
            }
        }
        out
    }

    fn untils(&self, root: Id) -> Vec<Id> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(f) = stack.pop() {
            if !seen.insert(f) {
                continue;
            }
            match *self.node(f) {
                Node::And(a, b) | Node::Or(a, b) | Node::Until(a, b) | Node::Release(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                _ => {}
            }
        }
        seen.into_iter().filter(|&f| matches!(self.node(f), Node::Until(..))).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Branch {
    lits: BTreeMap<AtomicPredicate, bool>,
    next: BTreeSet<Id>,
    postponed: BTreeSet<Id>,
}

impl Branch {
    fn covers(&self, other: &Branch) -> bool {
        self.lits.iter().all(|(a, v)| other.lits.get(a) == Some(v))
            && self.next.is_subset(&other.next)
            && self.postponed.is_subset(&other.postponed)
    }
}

fn expand(arena: &Arena, state: &BTreeSet<Id>) -> Vec<Branch> {
    let mut out = Vec::new();
    let todo: Vec<Id> = state.iter().rev().copied().collect();
    go(arena, todo, BTreeSet::new(), Branch::default(), &mut out);
    let mut out: Vec<Branch> = out
        .into_iter()
        .map(|b| Branch { next: arena.reduce(&b.next), ..b })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    // Remove branches that ask for more than another one with the same effect.
    let snapshot = out.clone();
    out.retain(|b| !snapshot.iter().any(|c| c != b && c.covers(b)));
    out
}

fn go(arena: &Arena, mut todo: Vec<Id>, mut done: BTreeSet<Id>, mut br: Branch, out: &mut Vec<Branch>) {
    while let Some(f) = todo.pop() {
        if !done.insert(f) {
            continue;
        }
        match arena.node(f).clone() {
            Node::True => {}
            Node::False => return,
            Node::Lit(p, v) => {
                if br.lits.insert(p, v) == Some(!v) {
                    return;
                }
            }
            Node::And(a, b) => {
                todo.push(b);
                todo.push(a);
            }
            Node::Or(a, b) => {
                let mut left = todo.clone();
                left.push(a);
                go(arena, left, done.clone(), br.clone(), out);
                todo.push(b);
            }
            Node::Until(a, b) => {
                let mut now = todo.clone();
                now.push(b);
                go(arena, now, done.clone(), br.clone(), out);
                br.next.insert(f);
                br.postponed.insert(f);
                todo.push(a);
            }
            Node::Release(a, b) => {
                let mut now = todo.clone();
                now.push(a);
                now.push(b);
                go(arena, now, done.clone(), br.clone(), out);
                br.next.insert(f);
                todo.push(b);
            }
        }
    }
    out.push(br);
}

/// Build a Büchi automaton accepting exactly the words that satisfy `f`.
pub fn translate(f: &Formula) -> Nba {
    let mut arena = Arena::default();
    let root = arena.lower(&to_nnf(f));
    let untils = arena.untils(root);
    let top = untils.len();

    type Key = (BTreeSet<Id>, usize);
    let init: Key = (arena.reduce(&[root].into()), 0);
    let mut ids: BTreeMap<Key, usize> = BTreeMap::new();
    let mut order: Vec<Key> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(init.clone(), 0);
    order.push(init.clone());
    queue.push_back(init);

    let mut expansions: HashMap<BTreeSet<Id>, Vec<Branch>> = HashMap::new();
    let mut edges: BTreeMap<(usize, usize), Vec<BTreeMap<AtomicPredicate, bool>>> = BTreeMap::new();
    while let Some(key) = queue.pop_front() {
        let src = ids[&key];
        let (state, level) = key;
        let branches = expansions.entry(state.clone()).or_insert_with(|| expand(&arena, &state)).clone();
        for b in branches {
            let mut j = if level == top { 0 } else { level };
            while j < top && !b.postponed.contains(&untils[j]) {
                j += 1;
            }
            let target: Key = (b.next.clone(), j);
            let dst = match ids.get(&target) {
                Some(&d) => d,
                None => {
                    let d = order.len();
                    ids.insert(target.clone(), d);
                    order.push(target.clone());
                    queue.push_back(target);
                    d
                }
            };
            edges.entry((src, dst)).or_default().push(b.lits);
        }
    }

    let mut nba = Nba::new();
    for (i, (_, level)) in order.iter().enumerate() {
        let q = nba.add_state(format!("q{i}"));
        if *level == top {
            nba.finals.insert(q);
        }
    }
    nba.initial.insert(0);
    for ((s, d), cubes) in edges {
        nba.add_transition(s, d, dnf_formula(simplify_dnf(cubes)));
    }
    nba
}

type Cube = BTreeMap<AtomicPredicate, bool>;

/// Absorption plus merging of cubes that differ in one literal's sign.
fn simplify_dnf(cubes: Vec<Cube>) -> Vec<Cube> {
    let mut set: BTreeSet<Cube> = cubes.into_iter().collect();
    loop {
        let mut changed = false;
        let snapshot: Vec<Cube> = set.iter().cloned().collect();
        for c in &snapshot {
            if snapshot.iter().any(|d| d != c && d.iter().all(|(a, v)| c.get(a) == Some(v))) {
                set.remove(c);
                changed = true;
            }
        }
        let snapshot: Vec<Cube> = set.iter().cloned().collect();
        'merge: for (i, c) in snapshot.iter().enumerate() {
            for d in &snapshot[i + 1..] {
                if c.len() != d.len() || !c.keys().eq(d.keys()) {
                    continue;
                }
                let diff: Vec<&AtomicPredicate> = c.iter().filter(|(a, v)| d[*a] != **v).map(|(a, _)| a).collect();
                if diff.len() == 1 {
                    let mut m = c.clone();
                    m.remove(diff[0]);
                    set.remove(c);
                    set.remove(d);
                    set.insert(m);
                    changed = true;
                    break 'merge;
                }
            }
        }
        if !changed {
            return set.into_iter().collect();
        }
    }
}

fn dnf_formula(cubes: Vec<Cube>) -> Formula {
    Formula::disj(cubes.into_iter().map(|c| {
        Formula::conj(c.into_iter().map(|(a, v)| if v { Formula::Atom(a) } else { Formula::not(Formula::Atom(a)) }))
    }))
}
