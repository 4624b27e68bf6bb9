use super::Formula;

/// Push negations down to atoms and expand `->` and `F`.
///
/// `F a` becomes `true U a`. `G` is kept as the dual of `F`. A negated until
/// has no direct counterpart without a release operator, so it is encoded as
/// `!(a U b) == (!b U (!a & !b)) | G !b`.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::True => {
            if neg {
                Formula::falsity()
            } else {
                Formula::True
            }
        }
        Formula::Atom(p) => {
            let a = Formula::Atom(p.clone());
            if neg {
                Formula::not(a)
            } else {
                a
            }
        }
        Formula::Not(a) => nnf(a, !neg),
        Formula::And(a, b) => {
            let (x, y) = (nnf(a, neg), nnf(b, neg));
            if neg {
                Formula::or(x, y)
            } else {
                Formula::and(x, y)
            }
        }
        Formula::Or(a, b) => {
            let (x, y) = (nnf(a, neg), nnf(b, neg));
            if neg {
                Formula::and(x, y)
            } else {
                Formula::or(x, y)
            }
        }
        Formula::Implies(a, b) => {
            if neg {
                Formula::and(nnf(a, false), nnf(b, true))
            } else {
                Formula::or(nnf(a, true), nnf(b, false))
            }
        }
        Formula::Eventually(a) => {
            if neg {
                Formula::always(nnf(a, true))
            } else {
                Formula::until(Formula::True, nnf(a, false))
            }
        }
        Formula::Always(a) => {
            if neg {
                Formula::until(Formula::True, nnf(a, true))
            } else {
                Formula::always(nnf(a, false))
            }
        }
        Formula::Until(a, b) => {
            if neg {
                let (na, nb) = (nnf(a, true), nnf(b, true));
                Formula::or(Formula::until(nb.clone(), Formula::and(na, nb.clone())), Formula::always(nb))
            } else {
                Formula::until(nnf(a, false), nnf(b, false))
            }
        }
    }
}

/// True when negation only appears directly above atoms or `true`, and no
/// `->` or `F` remains.
#[cfg(test)]
pub(crate) fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::Atom(_) => true,
        Formula::Not(a) => matches!(**a, Formula::Atom(_) | Formula::True),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => is_nnf(a) && is_nnf(b),
        Formula::Always(a) => is_nnf(a),
        Formula::Eventually(_) | Formula::Implies(..) => false,
    }
}
