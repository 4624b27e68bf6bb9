use std::collections::BTreeSet;
use std::fmt;

use super::{to_nnf, AtomicPredicate, Formula, LtlError, RobotId};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: AtomicPredicate,
    pub positive: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A disjunction of literals; the empty clause is `false`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(pub BTreeSet<Literal>);

impl Clause {
    pub fn robots(&self) -> BTreeSet<RobotId> {
        self.0.iter().map(|l| l.atom.robot).collect()
    }

    pub fn to_formula(&self) -> Formula {
        Formula::disj(self.0.iter().map(|l| {
            let a = Formula::Atom(l.atom.clone());
            if l.positive {
                a
            } else {
                Formula::not(a)
            }
        }))
    }

    fn is_tautology(&self) -> bool {
        self.0.iter().any(|l| self.0.contains(&Literal { atom: l.atom.clone(), positive: !l.positive }))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        if self.0.is_empty() {
            f.write_str("false")?;
        }
        f.write_str(")")
    }
}

/// CNF of a propositional formula by distribution.
///
/// Tautological clauses are dropped and subsumed clauses removed, which keeps
/// the result equivalent. Clauses come out in sorted order, so `true` gives
/// no clauses and `false` gives one empty clause.
pub fn to_cnf(b: &Formula) -> Result<Vec<Clause>, LtlError> {
    if !b.is_propositional() {
        return Err(LtlError::NotPropositional(b.to_string()));
    }
    let set = distribute(&to_nnf(b));
    let kept: Vec<&Clause> = set.iter().filter(|c| !set.iter().any(|d| d != *c && d.0.is_subset(&c.0))).collect();
    Ok(kept.into_iter().cloned().collect())
}

fn distribute(f: &Formula) -> BTreeSet<Clause> {
    match f {
        Formula::True => BTreeSet::new(),
        Formula::Not(inner) if inner.is_true() => [Clause::default()].into(),
        Formula::Atom(p) => [unit(p, true)].into(),
        Formula::Not(inner) => match &**inner {
            Formula::Atom(p) => [unit(p, false)].into(),
            _ => unreachable!("input is in negation normal form"),
        },
        Formula::And(a, b) => {
            let mut out = distribute(a);
            out.extend(distribute(b));
            out
        }
        Formula::Or(a, b) => {
            let (ca, cb) = (distribute(a), distribute(b));
            let mut out = BTreeSet::new();
            for x in &ca {
                for y in &cb {
                    let c = Clause(x.0.union(&y.0).cloned().collect());
                    if !c.is_tautology() {
                        out.insert(c);
                    }
                }
            }
            out
        }
        _ => unreachable!("input is propositional"),
    }
}

fn unit(p: &AtomicPredicate, positive: bool) -> Clause {
    Clause([Literal { atom: p.clone(), positive }].into())
}
