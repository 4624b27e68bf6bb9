//! LTL without `next`: syntax trees, parsing, negation normal form, CNF for
//! guards, and a direct evaluator over ultimately periodic words.
//!
//! The evaluator in [`lasso`] is deliberately independent of the automaton
//! code so that it can serve as the reference semantics in tests.

mod cnf;
mod lasso;
mod nnf;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

pub use cnf::{to_cnf, Clause, Literal};
pub use lasso::{eval_lasso, LassoWord};
pub use nnf::to_nnf;
pub use parse::{parse_ltl, parse_ltl_with, parse_predicate, Vocabulary};

/// 1-based robot index, as in predicate names `pi_<robot>_<region>`.
pub type RobotId = u32;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Region(String),
    Obstacle,
}

/// `pi_j_l` (robot `j` is inside region `l`) or `pi_j_O` (robot `j` is on an
/// obstacle cell).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicPredicate {
    pub robot: RobotId,
    pub target: Target,
}

impl AtomicPredicate {
    pub fn region(robot: RobotId, region: impl Into<String>) -> Self {
        Self { robot, target: Target::Region(region.into()) }
    }

    pub fn obstacle(robot: RobotId) -> Self {
        Self { robot, target: Target::Obstacle }
    }

    pub fn region_name(&self) -> Option<&str> {
        match &self.target {
            Target::Region(r) => Some(r),
            Target::Obstacle => None,
        }
    }

    pub fn is_obstacle(&self) -> bool {
        matches!(self.target, Target::Obstacle)
    }
}

impl fmt::Display for AtomicPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.target {
            Target::Region(r) => write!(f, "pi_{}_{}", self.robot, r),
            Target::Obstacle => write!(f, "pi_{}_O", self.robot),
        }
    }
}

/// The set of predicates that hold at one instant.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub BTreeSet<AtomicPredicate>);

impl Symbol {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, p: &AtomicPredicate) -> bool {
        self.0.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AtomicPredicate> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// No robot holds two region predicates at once. Obstacle predicates
    /// are not regions and do not count.
    pub fn is_feasible(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.iter().filter(|p| !p.is_obstacle()).all(|p| seen.insert(p.robot))
    }

    pub fn has_obstacle(&self) -> bool {
        self.0.iter().any(AtomicPredicate::is_obstacle)
    }

    /// The region robot `j` occupies according to this symbol (first one
    /// if the symbol is infeasible).
    pub fn region_of(&self, robot: RobotId) -> Option<&str> {
        self.0.iter().filter(|p| p.robot == robot).find_map(|p| p.region_name())
    }

    /// Robots with a region predicate in the symbol.
    pub fn involved(&self) -> BTreeSet<RobotId> {
        self.0.iter().filter(|p| !p.is_obstacle()).map(|p| p.robot).collect()
    }

    /// Keep only predicates in `atoms`.
    pub fn restrict(&self, atoms: &BTreeSet<AtomicPredicate>) -> Symbol {
        Symbol(self.0.intersection(atoms).cloned().collect())
    }
}

impl FromIterator<AtomicPredicate> for Symbol {
    fn from_iter<I: IntoIterator<Item = AtomicPredicate>>(iter: I) -> Self {
        Symbol(iter.into_iter().collect())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    Atom(AtomicPredicate),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(p: AtomicPredicate) -> Self {
        Formula::Atom(p)
    }

    pub fn falsity() -> Self {
        Formula::Not(Box::new(Formula::True))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn always(a: Formula) -> Self {
        Formula::Always(Box::new(a))
    }

    pub fn eventually(a: Formula) -> Self {
        Formula::Eventually(Box::new(a))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::or).unwrap_or_else(Formula::falsity)
    }

    /// Conjunction of literals fixing every atom in `atoms` to its value in `sym`.
    pub fn cube(atoms: &BTreeSet<AtomicPredicate>, sym: &Symbol) -> Self {
        Formula::conj(atoms.iter().map(|a| {
            if sym.contains(a) {
                Formula::Atom(a.clone())
            } else {
                Formula::not(Formula::Atom(a.clone()))
            }
        }))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::Not(inner) if inner.is_true())
    }

    pub fn atoms(&self) -> BTreeSet<AtomicPredicate> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<AtomicPredicate>) {
        match self {
            Formula::True => {}
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Not(a) | Formula::Always(a) | Formula::Eventually(a) => a.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn robots(&self) -> BTreeSet<RobotId> {
        self.atoms().into_iter().map(|a| a.robot).collect()
    }

    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::True | Formula::Atom(_) => true,
            Formula::Not(a) => a.is_propositional(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            Formula::Until(..) | Formula::Always(_) | Formula::Eventually(_) => false,
        }
    }

    /// Truth on the constant word `sym sym sym ...`; atoms outside `sym` are
    /// false. For a propositional guard this is plain evaluation.
    pub fn holds(&self, sym: &Symbol) -> bool {
        match self {
            Formula::True => true,
            Formula::Atom(p) => sym.contains(p),
            Formula::Not(a) => !a.holds(sym),
            Formula::And(a, b) => a.holds(sym) && b.holds(sym),
            Formula::Or(a, b) => a.holds(sym) || b.holds(sym),
            Formula::Implies(a, b) => !a.holds(sym) || b.holds(sym),
            Formula::Until(_, b) => b.holds(sym),
            Formula::Always(a) | Formula::Eventually(a) => a.holds(sym),
        }
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 1,
            Formula::Not(a) | Formula::Always(a) | Formula::Eventually(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Whether some obstacle predicate occurs under an even number of
    /// negations, i.e. the formula could demand a robot stand on an obstacle.
    pub fn has_positive_obstacle(&self) -> bool {
        fn walk(f: &Formula, positive: bool) -> bool {
            match f {
                Formula::True => false,
                Formula::Atom(p) => positive && p.is_obstacle(),
                Formula::Not(a) => walk(a, !positive),
                Formula::Always(a) | Formula::Eventually(a) => walk(a, positive),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => walk(a, positive) || walk(b, positive),
                Formula::Implies(a, b) => walk(a, !positive) || walk(b, positive),
            }
        }
        walk(self, true)
    }
}

impl From<AtomicPredicate> for Formula {
    fn from(p: AtomicPredicate) -> Self {
        Formula::Atom(p)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(x: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match x {
                Formula::And(..) | Formula::Or(..) | Formula::Until(..) | Formula::Implies(..) => {
                    write!(f, "({x})")
                }
                _ => write!(f, "{x}"),
            }
        }
        match self {
            Formula::True => f.write_str("true"),
            x if x.is_false() => f.write_str("false"),
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Not(a) => {
                f.write_str("!")?;
                operand(a, f)
            }
            Formula::Always(a) => {
                f.write_str("G ")?;
                operand(a, f)
            }
            Formula::Eventually(a) => {
                f.write_str("F ")?;
                operand(a, f)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Implies(a, b) => {
                let op = match self {
                    Formula::And(..) => "&",
                    Formula::Or(..) => "|",
                    Formula::Until(..) => "U",
                    _ => "->",
                };
                operand(a, f)?;
                write!(f, " {op} ")?;
                operand(b, f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LtlError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("the next operator is not supported (column {column})")]
    NextOperator { column: usize },
    #[error("unknown predicate `{name}` at column {column}")]
    UnknownPredicate { name: String, column: usize },
    #[error("expected a propositional formula, found temporal operator in `{0}`")]
    NotPropositional(String),
}
