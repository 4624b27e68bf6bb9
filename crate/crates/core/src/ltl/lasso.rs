use super::{Formula, Symbol};

/// The infinite word `prefix · cycle · cycle · ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<Symbol>,
    pub cycle: Vec<Symbol>,
}

impl LassoWord {
    /// Panics if `cycle` is empty.
    pub fn new(prefix: Vec<Symbol>, cycle: Vec<Symbol>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        Self { prefix, cycle }
    }

    /// Number of distinct positions (prefix plus one copy of the cycle).
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn at(&self, i: usize) -> &Symbol {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Successor of position `i` in the folded word graph.
    pub fn succ(&self, i: usize) -> usize {
        if i + 1 < self.positions() {
            i + 1
        } else {
            self.prefix.len()
        }
    }
}

/// Does the lasso word satisfy `f` at position 0?
///
/// Each subformula gets one truth value per folded position. `U` and `F`
/// are least fixpoints and `G` a greatest fixpoint of their one-step
/// unfoldings; both stabilise after at most one sweep per position, since a
/// value can only flip once.
pub fn eval_lasso(f: &Formula, w: &LassoWord) -> bool {
    assert!(!w.cycle.is_empty(), "lasso cycle must be nonempty");
    eval(f, w)[0]
}

fn eval(f: &Formula, w: &LassoWord) -> Vec<bool> {
    let n = w.positions();
    match f {
        Formula::True => vec![true; n],
        Formula::Atom(p) => (0..n).map(|i| w.at(i).contains(p)).collect(),
        Formula::Not(a) => eval(a, w).into_iter().map(|v| !v).collect(),
        Formula::And(a, b) => zip(eval(a, w), eval(b, w), |x, y| x && y),
        Formula::Or(a, b) => zip(eval(a, w), eval(b, w), |x, y| x || y),
        Formula::Implies(a, b) => zip(eval(a, w), eval(b, w), |x, y| !x || y),
        Formula::Until(a, b) => {
            let (va, vb) = (eval(a, w), eval(b, w));
            fixpoint(w, false, |i, next| vb[i] || (va[i] && next))
        }
        Formula::Eventually(a) => {
            let va = eval(a, w);
            fixpoint(w, false, |i, next| va[i] || next)
        }
        Formula::Always(a) => {
            let va = eval(a, w);
            fixpoint(w, true, |i, next| va[i] && next)
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

fn fixpoint(w: &LassoWord, init: bool, step: impl Fn(usize, bool) -> bool) -> Vec<bool> {
    let n = w.positions();
    let mut v = vec![init; n];
    // Bounded by n + 1 sweeps; every productive sweep flips at least one value.
    for _ in 0..=n {
        let mut changed = false;
        for i in (0..n).rev() {
            let nv = step(i, v[w.succ(i)]);
            if nv != v[i] {
                v[i] = nv;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse_ltl, AtomicPredicate};

    fn s(names: &[&str]) -> Symbol {
        names.iter().map(|n| AtomicPredicate::region(1, *n)).collect()
    }

    fn holds(text: &str, prefix: &[&[&str]], cycle: &[&[&str]]) -> bool {
        let w = LassoWord::new(prefix.iter().map(|x| s(x)).collect(), cycle.iter().map(|x| s(x)).collect());
        eval_lasso(&parse_ltl(text).unwrap(), &w)
    }

    #[test]
    fn basic_cases() {
        assert!(holds("F pi_1_a", &[&[]], &[&["a"]]));
        assert!(!holds("G pi_1_a", &[], &[&[]]));
        assert!(holds("GF pi_1_a & GF pi_1_b", &[], &[&["a"], &["b"]]));
        assert!(!holds("GF pi_1_a & GF pi_1_b", &[], &[&["a"]]));
    }

    #[test]
    fn until_needs_right_side() {
        assert!(holds("pi_1_a U pi_1_b", &[&["a"], &["a"]], &[&["b"]]));
        assert!(!holds("pi_1_a U pi_1_b", &[], &[&["a"]]));
        assert!(!holds("pi_1_a U pi_1_b", &[&["a"], &[]], &[&["b"]]));
        // Satisfied in the cycle only after the prefix.
        assert!(holds("F G pi_1_a", &[&[], &["b"]], &[&["a"]]));
        assert!(!holds("F G pi_1_a", &[], &[&["a"], &[]]));
    }
}
