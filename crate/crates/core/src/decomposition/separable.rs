use std::collections::BTreeMap;
use std::fmt;

use crate::ltl::{to_cnf, Clause, Formula, LtlError, RobotId};

/// Whether a guard splits into one independent conjunct per robot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separability {
    pub clauses: Vec<Clause>,
    /// Clauses whose literals mention more than one robot.
    pub violations: Vec<Clause>,
    /// Conjunction of each robot's clauses. Empty when a violation exists.
    pub per_robot: BTreeMap<RobotId, Formula>,
}

impl Separability {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Separability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.violations.first() {
            let robots: Vec<String> = c.robots().iter().map(|r| r.to_string()).collect();
            return write!(f, "per-robot split violated: clause {c} spans robots {{{}}}", robots.join(","));
        }
        f.write_str("per-robot split holds")?;
        for (j, d) in &self.per_robot {
            write!(f, "; d_{j} = {d}")?;
        }
        Ok(())
    }
}

/// CNF the guard and group clauses by robot.
pub fn check_separable(guard: &Formula) -> Result<Separability, LtlError> {
    let clauses = to_cnf(guard)?;
    let violations: Vec<Clause> = clauses.iter().filter(|c| c.robots().len() > 1).cloned().collect();
    let mut per_robot = BTreeMap::new();
    if violations.is_empty() {
        let mut groups: BTreeMap<RobotId, Vec<Formula>> = BTreeMap::new();
        for c in &clauses {
            if let Some(&j) = c.robots().iter().next() {
                groups.entry(j).or_default().push(c.to_formula());
            }
        }
        per_robot = groups.into_iter().map(|(j, fs)| (j, Formula::conj(fs))).collect();
    }
    Ok(Separability { clauses, violations, per_robot })
}
