use std::collections::BTreeSet;

use super::{AtomicPredicate, Formula, LtlError, RobotId, Target};

/// Robots and regions a formula may refer to.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    pub robots: RobotId,
    pub regions: BTreeSet<String>,
}

impl Vocabulary {
    fn admits(&self, p: &AtomicPredicate) -> bool {
        (1..=self.robots).contains(&p.robot)
            && match &p.target {
                Target::Obstacle => true,
                Target::Region(r) => self.regions.contains(r),
            }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(AtomicPredicate),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Until,
    Eventually,
    Always,
    Next,
    LParen,
    RParen,
    End,
}

/// Parse formula text.
///
/// Syntax: `pi_<robot>_<region>`, `pi_<robot>_O`, `true`, `false`, `!`,
/// `&`, `|`, `->`, `U`, `F`, `G` and parentheses. Unicode `¬ ∧ ∨ → ◇ □`
/// are accepted as aliases. Binding, tightest first: unary, `U` (right
/// associative), `&`, `|`, `->` (right associative).
pub fn parse_ltl(text: &str) -> Result<Formula, LtlError> {
    Parser::new(text, None)?.run()
}

/// Like [`parse_ltl`] but also rejects predicates outside `vocab`.
pub fn parse_ltl_with(text: &str, vocab: &Vocabulary) -> Result<Formula, LtlError> {
    Parser::new(text, Some(vocab))?.run()
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(text: &str, vocab: Option<&Vocabulary>) -> Result<Vec<(Tok, usize)>, LtlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '!' | '~' | '¬' => Some(Tok::Not),
            '∧' => Some(Tok::And),
            '∨' => Some(Tok::Or),
            '→' | '⇒' => Some(Tok::Implies),
            '◇' => Some(Tok::Eventually),
            '□' => Some(Tok::Always),
            '◯' => Some(Tok::Next),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, column));
            i += 1;
            continue;
        }
        match c {
            '&' | '|' => {
                let t = if c == '&' { Tok::And } else { Tok::Or };
                i += if chars.get(i + 1) == Some(&c) { 2 } else { 1 };
                out.push((t, column));
            }
            '-' | '=' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Implies, column));
                i += 2;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                lex_word(&word, column, vocab, &mut out)?;
            }
            _ => {
                return Err(LtlError::Syntax { column, message: format!("unexpected character `{c}`") });
            }
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

fn lex_word(
    word: &str,
    column: usize,
    vocab: Option<&Vocabulary>,
    out: &mut Vec<(Tok, usize)>,
) -> Result<(), LtlError> {
    match word {
        "true" => out.push((Tok::True, column)),
        "false" => out.push((Tok::False, column)),
        "U" => out.push((Tok::Until, column)),
        // Runs of unary operators such as `GF` or `FG`.
        w if w.chars().all(|c| matches!(c, 'F' | 'G' | 'X')) => {
            for (k, c) in w.chars().enumerate() {
                let t = match c {
                    'F' => Tok::Eventually,
                    'G' => Tok::Always,
                    _ => Tok::Next,
                };
                out.push((t, column + k));
            }
        }
        w => {
            let p = parse_predicate(w).ok_or_else(|| LtlError::UnknownPredicate { name: w.to_string(), column })?;
            if let Some(v) = vocab {
                if !v.admits(&p) {
                    return Err(LtlError::UnknownPredicate { name: w.to_string(), column });
                }
            }
            out.push((Tok::Atom(p), column));
        }
    }
    Ok(())
}

/// `pi_<robot>_<region>` or `pi_<robot>_O`.
pub fn parse_predicate(word: &str) -> Option<AtomicPredicate> {
    let rest = word.strip_prefix("pi_")?;
    let (robot, target) = rest.split_once('_')?;
    if robot.is_empty() || !robot.bytes().all(|b| b.is_ascii_digit()) || target.is_empty() {
        return None;
    }
    let robot: RobotId = robot.parse().ok().filter(|&r| r >= 1)?;
    Some(if target == "O" { AtomicPredicate::obstacle(robot) } else { AtomicPredicate::region(robot, target) })
}

impl Parser {
    fn new(text: &str, vocab: Option<&Vocabulary>) -> Result<Self, LtlError> {
        Ok(Self { toks: lex(text, vocab)?, pos: 0 })
    }

    fn run(mut self) -> Result<Formula, LtlError> {
        let f = self.implication()?;
        match self.peek() {
            Tok::End => Ok(f),
            _ => Err(self.unexpected()),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> LtlError {
        let message = match self.peek() {
            Tok::End => "unexpected end of input".to_string(),
            t => format!("unexpected token {t:?}"),
        };
        LtlError::Syntax { column: self.column(), message }
    }

    fn implication(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LtlError> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, LtlError> {
        let mut f = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = Formula::and(f, self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        let column = self.column();
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            Tok::Always => {
                self.bump();
                Ok(Formula::always(self.unary()?))
            }
            Tok::Next => Err(LtlError::NextOperator { column }),
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, LtlError> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::falsity())
            }
            Tok::Atom(p) => {
                self.bump();
                Ok(Formula::Atom(p))
            }
            Tok::LParen => {
                self.bump();
                let f = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected());
                }
                self.bump();
                Ok(f)
            }
            _ => Err(self.unexpected()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(r: RobotId, l: &str) -> Formula {
        Formula::atom(AtomicPredicate::region(r, l))
    }

    #[test]
    fn eventually_and_always_obstacle() {
        let f = parse_ltl("F(pi_1_l1) & G(!pi_1_O)").unwrap();
        let want = Formula::and(
            Formula::eventually(a(1, "l1")),
            Formula::always(Formula::not(Formula::atom(AtomicPredicate::obstacle(1)))),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn until_node() {
        assert_eq!(parse_ltl("pi_1_l1 U pi_1_l2").unwrap(), Formula::until(a(1, "l1"), a(1, "l2")));
    }

    #[test]
    fn next_is_rejected() {
        assert!(matches!(parse_ltl("X pi_1_l1"), Err(LtlError::NextOperator { column: 1 })));
        assert!(matches!(parse_ltl("F X pi_1_l1"), Err(LtlError::NextOperator { column: 3 })));
    }

    #[test]
    fn precedence_and_associativity() {
        // U binds tighter than &, & tighter than |, | tighter than ->.
        let f = parse_ltl("pi_1_a | pi_1_b & pi_1_c U pi_1_d -> pi_1_e").unwrap();
        let want = Formula::implies(
            Formula::or(a(1, "a"), Formula::and(a(1, "b"), Formula::until(a(1, "c"), a(1, "d")))),
            a(1, "e"),
        );
        assert_eq!(f, want);
        let f = parse_ltl("pi_1_a U pi_1_b U pi_1_c").unwrap();
        assert_eq!(f, Formula::until(a(1, "a"), Formula::until(a(1, "b"), a(1, "c"))));
        let f = parse_ltl("!pi_1_a U pi_1_b").unwrap();
        assert_eq!(f, Formula::until(Formula::not(a(1, "a")), a(1, "b")));
    }

    #[test]
    fn operator_runs() {
        assert_eq!(parse_ltl("GF pi_1_a").unwrap(), Formula::always(Formula::eventually(a(1, "a"))));
    }

    #[test]
    fn errors_carry_columns() {
        match parse_ltl("pi_1_a & ") {
            Err(LtlError::Syntax { column, .. }) => assert_eq!(column, 10),
            other => panic!("{other:?}"),
        }
        match parse_ltl("pi_1_a & foo") {
            Err(LtlError::UnknownPredicate { name, column }) => {
                assert_eq!(name, "foo");
                assert_eq!(column, 10);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_ltl("(pi_1_a").is_err());
        assert!(parse_ltl("pi_0_a").is_err());
    }

    #[test]
    fn vocabulary_checks() {
        let v = Vocabulary { robots: 2, regions: ["l1".to_string()].into() };
        assert!(parse_ltl_with("F pi_2_l1 & G !pi_1_O", &v).is_ok());
        assert!(matches!(parse_ltl_with("F pi_3_l1", &v), Err(LtlError::UnknownPredicate { .. })));
        assert!(matches!(parse_ltl_with("F pi_1_l9", &v), Err(LtlError::UnknownPredicate { .. })));
    }
}
