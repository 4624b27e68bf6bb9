//! Reader for the Hanoi Omega-Automata format, restricted to state-based
//! Büchi acceptance with explicit edge labels.

use std::collections::BTreeMap;

use super::{Nba, StateId};
use crate::ltl::{parse_predicate as predicate, AtomicPredicate, Formula};

/// Maps HOA atomic proposition names to predicates.
pub type AtomTable = BTreeMap<String, AtomicPredicate>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HoaError {
    #[error("HOA syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported acceptance: {0}")]
    UnsupportedAcceptance(String),
    #[error("unsupported HOA feature: {0}")]
    Unsupported(String),
    #[error("unmapped atom `{0}`")]
    UnmappedAtom(String),
    #[error("atom table line {line}: {message}")]
    AtomTable { line: usize, message: String },
}

/// Parse `name = pi_<robot>_<region>` lines. Blank lines and `#` comments
/// are ignored.
pub fn parse_atom_table(text: &str) -> Result<AtomTable, HoaError> {
    let mut table = AtomTable::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| HoaError::AtomTable { line: k + 1, message: message.to_string() };
        let (name, value) = line.split_once('=').ok_or_else(|| err("expected `name = predicate`"))?;
        let (name, value) = (name.trim().trim_matches('"'), value.trim());
        if name.is_empty() {
            return Err(err("empty atom name"));
        }
        let p = predicate(value).ok_or_else(|| err(&format!("`{value}` is not a predicate name")))?;
        if table.insert(name.to_string(), p).is_some() {
            return Err(err(&format!("atom `{name}` mapped twice")));
        }
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Header(String),
    Ident(String),
    Str(String),
    Int(usize),
    Punct(char),
    Body,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, HoaError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line) = (0, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                line += usize::from(chars[i] == '\n');
                i += 1;
            }
            i += 2;
        } else if c == '"' {
            let start = line;
            let mut s = String::new();
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\\' && i + 1 < chars.len() {
                    i += 1;
                }
                line += usize::from(chars[i] == '\n');
                s.push(chars[i]);
                i += 1;
            }
            if i >= chars.len() {
                return Err(HoaError::Syntax { line: start, message: "unterminated string".into() });
            }
            i += 1;
            out.push((Tok::Str(s), start));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| HoaError::Syntax { line, message: format!("bad integer {s}") })?;
            out.push((Tok::Int(n), line));
        } else if c == '-' && chars[i..].starts_with(&['-', '-']) {
            let start = i;
            i += 2;
            while i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '-') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            match s.as_str() {
                "--BODY--" => out.push((Tok::Body, line)),
                "--END--" => out.push((Tok::End, line)),
                "--ABORT--" => return Err(HoaError::Syntax { line, message: "automaton aborted".into() }),
                _ => return Err(HoaError::Syntax { line, message: format!("unexpected `{s}`") }),
            }
        } else if c.is_ascii_alphabetic() || c == '_' || c == '@' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if chars.get(i) == Some(&':') {
                i += 1;
                out.push((Tok::Header(s), line));
            } else {
                out.push((Tok::Ident(s), line));
            }
        } else if "[]{}()!&|".contains(c) {
            out.push((Tok::Punct(c), line));
            i += 1;
        } else {
            return Err(HoaError::Syntax { line, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(1, |(_, l)| *l)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, HoaError> {
        Err(HoaError::Syntax { line: self.line(), message: message.into() })
    }

    fn int(&mut self) -> Result<usize, HoaError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(n),
            _ => {
                self.pos -= 1;
                self.err("expected an integer")
            }
        }
    }

    fn punct(&mut self, c: char) -> Result<(), HoaError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    /// Tokens up to the next header or `--BODY--`.
    fn header_values(&mut self) -> Vec<Tok> {
        let mut v = Vec::new();
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Header(_) | Tok::Body) {
                break;
            }
            v.push(self.next().unwrap());
        }
        v
    }
}

fn render(toks: &[Tok]) -> String {
    toks.iter()
        .map(|t| match t {
            Tok::Ident(s) | Tok::Header(s) => s.clone(),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Int(n) => n.to_string(),
            Tok::Punct(c) => c.to_string(),
            Tok::Body => "--BODY--".into(),
            Tok::End => "--END--".into(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Decode a HOA v1 automaton. Atom names are looked up in `table`; names
/// missing from it are accepted when they are themselves predicate names.
pub fn import_hoa(text: &str, table: &AtomTable) -> Result<Nba, HoaError> {
    let mut c = Cursor { toks: lex(text)?, pos: 0 };
    match (c.next(), c.next()) {
        (Some(Tok::Header(h)), Some(Tok::Ident(v))) if h == "HOA" && v == "v1" => {}
        _ => return c.err("expected `HOA: v1`"),
    }

    let mut states: Option<usize> = None;
    let mut starts: Vec<usize> = Vec::new();
    let mut aps: Vec<String> = Vec::new();
    let mut all_accepting = false;
    let mut seen_acceptance = false;
    loop {
        match c.next() {
            Some(Tok::Body) => break,
            Some(Tok::Header(h)) => {
                let line = c.line();
                let vals = c.header_values();
                match h.as_str() {
                    "States" => match vals.as_slice() {
                        [Tok::Int(n)] => states = Some(*n),
                        _ => return Err(HoaError::Syntax { line, message: "bad States header".into() }),
                    },
                    "Start" => match vals.as_slice() {
                        [Tok::Int(n)] => starts.push(*n),
                        _ => return Err(HoaError::Unsupported(format!("alternating start `{}`", render(&vals)))),
                    },
                    "AP" => {
                        let Some((Tok::Int(n), names)) = vals.split_first() else {
                            return Err(HoaError::Syntax { line, message: "bad AP header".into() });
                        };
                        for t in names {
                            match t {
                                Tok::Str(s) => aps.push(s.clone()),
                                _ => return Err(HoaError::Syntax { line, message: "AP names must be strings".into() }),
                            }
                        }
                        if aps.len() != *n {
                            return Err(HoaError::Syntax {
                                line,
                                message: format!("AP count {n} but {} names", aps.len()),
                            });
                        }
                    }
                    "Acceptance" => {
                        seen_acceptance = true;
                        let shown = render(&vals);
                        let buchi =
                            [Tok::Int(1), Tok::Ident("Inf".into()), Tok::Punct('('), Tok::Int(0), Tok::Punct(')')];
                        if vals.as_slice() == buchi {
                            all_accepting = false;
                        } else if vals.as_slice() == [Tok::Int(0), Tok::Ident("t".into())] {
                            all_accepting = true;
                        } else {
                            return Err(HoaError::UnsupportedAcceptance(shown));
                        }
                    }
                    "properties" => {
                        for t in &vals {
                            if let Tok::Ident(p) = t {
                                match p.as_str() {
                                    "trans-acc" => {
                                        return Err(HoaError::UnsupportedAcceptance("transition-based".into()))
                                    }
                                    "implicit-labels" | "state-labels" => return Err(HoaError::Unsupported(p.clone())),
                                    _ => {}
                                }
                            }
                        }
                    }
                    "Alias" => return Err(HoaError::Unsupported("aliases".into())),
                    _ => {}
                }
            }
            _ => return c.err("expected a header item"),
        }
    }
    if !seen_acceptance {
        return c.err("missing Acceptance header");
    }

    let atoms: Vec<AtomicPredicate> = aps
        .iter()
        .map(|n| table.get(n).cloned().or_else(|| predicate(n)).ok_or_else(|| HoaError::UnmappedAtom(n.clone())))
        .collect::<Result<_, _>>()?;

    struct State {
        name: Option<String>,
        accepting: bool,
        edges: Vec<(Formula, usize)>,
    }
    let mut body: BTreeMap<usize, State> = BTreeMap::new();
    let mut current: Option<usize> = None;
    loop {
        match c.peek() {
            Some(Tok::End) => break,
            None => return c.err("missing --END--"),
            Some(Tok::Header(h)) if h == "State" => {
                c.next();
                if c.peek() == Some(&Tok::Punct('[')) {
                    return Err(HoaError::Unsupported("state labels".into()));
                }
                let id = c.int()?;
                let name = match c.peek() {
                    Some(Tok::Str(s)) => {
                        let s = s.clone();
                        c.next();
                        Some(s)
                    }
                    _ => None,
                };
                let mut accepting = all_accepting;
                if c.peek() == Some(&Tok::Punct('{')) {
                    c.next();
                    while c.peek() != Some(&Tok::Punct('}')) {
                        match c.int()? {
                            0 => accepting = true,
                            k => return Err(HoaError::UnsupportedAcceptance(format!("acceptance set {k}"))),
                        }
                    }
                    c.next();
                }
                if body.insert(id, State { name, accepting, edges: Vec::new() }).is_some() {
                    return c.err(format!("state {id} declared twice"));
                }
                current = Some(id);
            }
            Some(Tok::Punct('[')) => {
                let Some(src) = current else { return c.err("edge before any State") };
                c.next();
                let guard = label(&mut c, &atoms)?;
                c.punct(']')?;
                let dst = c.int()?;
                if c.peek() == Some(&Tok::Punct('&')) {
                    return Err(HoaError::Unsupported("universal branching".into()));
                }
                if c.peek() == Some(&Tok::Punct('{')) {
                    return Err(HoaError::UnsupportedAcceptance("transition-based".into()));
                }
                body.get_mut(&src).expect("current state exists").edges.push((guard, dst));
            }
            Some(Tok::Int(_)) => return Err(HoaError::Unsupported("implicit labels".into())),
            _ => return c.err("unexpected token in body"),
        }
    }

    let n = states.unwrap_or_else(|| body.keys().max().map_or(0, |m| m + 1));
    let mut nba = Nba::new();
    for q in 0..n {
        let name = body.get(&q).and_then(|s| s.name.clone()).unwrap_or_else(|| format!("s{q}"));
        nba.add_state(name);
        if body.get(&q).is_some_and(|s| s.accepting) {
            nba.finals.insert(q);
        }
    }
    let check = |q: usize| {
        if q < n {
            Ok(q)
        } else {
            Err(HoaError::Syntax { line: 0, message: format!("state {q} out of range") })
        }
    };
    for &s in &starts {
        nba.initial.insert(check(s)?);
    }
    for (src, st) in body {
        let src: StateId = check(src)?;
        for (g, dst) in st.edges {
            nba.add_transition(src, check(dst)?, g);
        }
    }
    Ok(nba)
}

fn label(c: &mut Cursor, atoms: &[AtomicPredicate]) -> Result<Formula, HoaError> {
    let mut f = conj(c, atoms)?;
    while c.peek() == Some(&Tok::Punct('|')) {
        c.next();
        f = Formula::or(f, conj(c, atoms)?);
    }
    Ok(f)
}

fn conj(c: &mut Cursor, atoms: &[AtomicPredicate]) -> Result<Formula, HoaError> {
    let mut f = unary(c, atoms)?;
    while c.peek() == Some(&Tok::Punct('&')) {
        c.next();
        f = Formula::and(f, unary(c, atoms)?);
    }
    Ok(f)
}

fn unary(c: &mut Cursor, atoms: &[AtomicPredicate]) -> Result<Formula, HoaError> {
    match c.next() {
        Some(Tok::Punct('!')) => Ok(Formula::not(unary(c, atoms)?)),
        Some(Tok::Punct('(')) => {
            let f = label(c, atoms)?;
            c.punct(')')?;
            Ok(f)
        }
        Some(Tok::Ident(s)) if s == "t" => Ok(Formula::True),
        Some(Tok::Ident(s)) if s == "f" => Ok(Formula::falsity()),
        Some(Tok::Int(k)) => match atoms.get(k) {
            Some(p) => Ok(Formula::Atom(p.clone())),
            None => {
                c.pos -= 1;
                c.err(format!("atom index {k} out of range"))
            }
        },
        _ => {
            c.pos -= 1;
            c.err("bad label expression")
        }
    }
}
