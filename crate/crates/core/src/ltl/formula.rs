//! LTL formulas: syntax tree, parser, negation normal form and evaluation on
//! ultimately periodic words.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ParseError;

/// A set of atomic propositions holding at one position of a word.
pub type AtomSet = BTreeSet<String>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Globally(Box<Formula>),
}

use Formula::*;

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Formula {
        Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Formula {
        Eventually(Box::new(f))
    }

    pub fn globally(f: Formula) -> Formula {
        Globally(Box::new(f))
    }

    /// Number of operators (atoms and constants count zero).
    pub fn size(&self) -> usize {
        match self {
            True | False | Atom(_) => 0,
            Not(f) | Next(f) | Eventually(f) | Globally(f) => 1 + f.size(),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Number of temporal operators (X, U, R, F, G).
    pub fn temporal_count(&self) -> usize {
        match self {
            True | False | Atom(_) => 0,
            Not(f) => f.temporal_count(),
            Next(f) | Eventually(f) | Globally(f) => 1 + f.temporal_count(),
            And(a, b) | Or(a, b) => a.temporal_count() + b.temporal_count(),
            Until(a, b) | Release(a, b) => 1 + a.temporal_count() + b.temporal_count(),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            True | False => {}
            Atom(a) => {
                out.insert(a.clone());
            }
            Not(f) | Next(f) | Eventually(f) | Globally(f) => f.collect_atoms(out),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// True when negations only occur on atoms and F/G are absent.
    pub fn is_nnf(&self) -> bool {
        match self {
            True | False | Atom(_) => true,
            Not(f) => matches!(**f, Atom(_)),
            Next(f) => f.is_nnf(),
            Eventually(_) | Globally(_) => false,
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Atom(a) => write!(f, "{a}"),
            Not(g) => write!(f, "!{}", Paren(g)),
            Next(g) => write!(f, "X {}", Paren(g)),
            Eventually(g) => write!(f, "F {}", Paren(g)),
            Globally(g) => write!(f, "G {}", Paren(g)),
            And(a, b) => write!(f, "{} && {}", Paren(a), Paren(b)),
            Or(a, b) => write!(f, "{} || {}", Paren(a), Paren(b)),
            Until(a, b) => write!(f, "{} U {}", Paren(a), Paren(b)),
            Release(a, b) => write!(f, "{} R {}", Paren(a), Paren(b)),
        }
    }
}

/// Prints a subformula, parenthesised unless it is atomic.
struct Paren<'a>(&'a Formula);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            True | False | Atom(_) => write!(f, "{}", self.0),
            other => write!(f, "({other})"),
        }
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Next,
    Until,
    Release,
    Eventually,
    Globally,
    LParen,
    RParen,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, width) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '!' | '~' => (Tok::Not, 1),
            '&' => (Tok::And, if two == "&&" { 2 } else { 1 }),
            '|' => (Tok::Or, if two == "||" { 2 } else { 1 }),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '.')
                {
                    j += 1;
                }
                let word: String = chars[start..j].iter().collect();
                let tok = match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    "R" => Tok::Release,
                    "F" => Tok::Eventually,
                    "G" => Tok::Globally,
                    _ => Tok::Ident(word),
                };
                (tok, j - start)
            }
            other => {
                return Err(ParseError::new(
                    1,
                    col,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        toks.push((tok, col));
        i += width;
    }
    toks.push((Tok::End, chars.len() + 1));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(1, self.col(), msg)
    }

    // or := and ('||' and)*
    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    // and := binary ('&&' binary)*
    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.binary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.binary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    // binary := unary (('U' | 'R') binary)?   -- right associative
    fn binary(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                Ok(Formula::until(lhs, self.binary()?))
            }
            Tok::Release => {
                self.bump();
                Ok(Formula::release(lhs, self.binary()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Next => {
                self.bump();
                Ok(Formula::next(self.unary()?))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            Tok::Globally => {
                self.bump();
                Ok(Formula::globally(self.unary()?))
            }
            Tok::True => {
                self.bump();
                Ok(True)
            }
            Tok::False => {
                self.bump();
                Ok(False)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.or()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(self.error("unexpected end of formula")),
            other => Err(self.error(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an LTL formula.
///
/// Precedence from loosest to tightest: `||`, `&&`, `U`/`R` (right
/// associative), then the prefix operators `!`, `X`, `F`, `G`.
pub fn parse_ltl(text: &str) -> Result<Formula, ParseError> {
    let Lexer { toks } = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let f = parser.or()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("trailing input"));
    }
    Ok(f)
}

/// Parses a formula and reports atoms that are not in `declared`.
pub fn parse_ltl_checked(
    text: &str,
    declared: &BTreeSet<String>,
) -> Result<(Formula, Vec<String>), ParseError> {
    let f = parse_ltl(text)?;
    let warnings = f
        .atoms()
        .into_iter()
        .filter(|a| !declared.contains(a))
        .map(|a| format!("atom `{a}` is not declared"))
        .collect();
    Ok((f, warnings))
}

// ---------------------------------------------------------------------------
// Negation normal form

/// Pushes negations down to atoms and eliminates F and G
/// (`F φ = true U φ`, `G φ = false R φ`).
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (True, false) | (False, true) => True,
        (True, true) | (False, false) => False,
        (Atom(a), false) => Atom(a.clone()),
        (Atom(a), true) => Formula::not(Atom(a.clone())),
        (Not(g), _) => nnf(g, !neg),
        (And(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (And(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Or(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Or(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
        (Next(g), _) => Formula::next(nnf(g, neg)),
        (Until(a, b), false) => Formula::until(nnf(a, false), nnf(b, false)),
        (Until(a, b), true) => Formula::release(nnf(a, true), nnf(b, true)),
        (Release(a, b), false) => Formula::release(nnf(a, false), nnf(b, false)),
        (Release(a, b), true) => Formula::until(nnf(a, true), nnf(b, true)),
        (Eventually(g), false) => Formula::until(True, nnf(g, false)),
        (Eventually(g), true) => Formula::release(False, nnf(g, true)),
        (Globally(g), false) => Formula::release(False, nnf(g, false)),
        (Globally(g), true) => Formula::until(True, nnf(g, true)),
    }
}

// ---------------------------------------------------------------------------
// Lasso evaluation

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("the cycle of a lasso word must be nonempty")]
pub struct EmptyCycle;

/// Decides whether `prefix · cycle^ω` satisfies `f`.
///
/// Every suffix of a lasso word equals one of the `|prefix| + |cycle|`
/// suffixes starting at a stored position, so each subformula is evaluated
/// as a vector over those positions; U and R are solved as least and
/// greatest fixpoints.
pub fn eval_lasso(f: &Formula, prefix: &[AtomSet], cycle: &[AtomSet]) -> Result<bool, EmptyCycle> {
    if cycle.is_empty() {
        return Err(EmptyCycle);
    }
    let word: Vec<&AtomSet> = prefix.iter().chain(cycle.iter()).collect();
    let n = word.len();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { prefix.len() };
    Ok(eval_positions(f, &word, &succ)[0])
}

fn eval_positions(f: &Formula, word: &[&AtomSet], succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let n = word.len();
    match f {
        True => vec![true; n],
        False => vec![false; n],
        Atom(a) => word.iter().map(|s| s.contains(a)).collect(),
        Not(g) => eval_positions(g, word, succ).into_iter().map(|v| !v).collect(),
        And(a, b) => {
            let (x, y) = (eval_positions(a, word, succ), eval_positions(b, word, succ));
            x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
        }
        Or(a, b) => {
            let (x, y) = (eval_positions(a, word, succ), eval_positions(b, word, succ));
            x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
        }
        Next(g) => {
            let x = eval_positions(g, word, succ);
            (0..n).map(|i| x[succ(i)]).collect()
        }
        Until(a, b) => {
            let (x, y) = (eval_positions(a, word, succ), eval_positions(b, word, succ));
            fixpoint(n, false, |cur, i| y[i] || (x[i] && cur[succ(i)]))
        }
        Release(a, b) => {
            let (x, y) = (eval_positions(a, word, succ), eval_positions(b, word, succ));
            fixpoint(n, true, |cur, i| y[i] && (x[i] || cur[succ(i)]))
        }
        Eventually(g) => {
            let y = eval_positions(g, word, succ);
            fixpoint(n, false, |cur, i| y[i] || cur[succ(i)])
        }
        Globally(g) => {
            let y = eval_positions(g, word, succ);
            fixpoint(n, true, |cur, i| y[i] && cur[succ(i)])
        }
    }
}

fn fixpoint(n: usize, init: bool, step: impl Fn(&[bool], usize) -> bool) -> Vec<bool> {
    let mut cur = vec![init; n];
    loop {
        let next: Vec<bool> = (0..n).map(|i| step(&cur, i)).collect();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(atoms: &[&str]) -> AtomSet {
        atoms.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_eventually() {
        assert_eq!(
            parse_ltl("F call_CopyFileA").unwrap(),
            Formula::eventually(Formula::atom("call_CopyFileA"))
        );
    }

    #[test]
    fn until_binds_tighter_than_or() {
        let f = parse_ltl("a U b || c").unwrap();
        assert_eq!(
            f,
            Formula::or(
                Formula::until(Formula::atom("a"), Formula::atom("b")),
                Formula::atom("c")
            )
        );
    }

    #[test]
    fn until_is_right_associative() {
        let f = parse_ltl("a U b U c").unwrap();
        assert_eq!(
            f,
            Formula::until(
                Formula::atom("a"),
                Formula::until(Formula::atom("b"), Formula::atom("c"))
            )
        );
    }

    #[test]
    fn parses_globally_and_next() {
        assert_eq!(
            parse_ltl("G (call && X ret)").unwrap(),
            Formula::globally(Formula::and(
                Formula::atom("call"),
                Formula::next(Formula::atom("ret"))
            ))
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_ltl("a && (b || ").unwrap_err();
        assert_eq!(err.column, 12);
        let err = parse_ltl("a $ b").unwrap_err();
        assert_eq!(err.column, 3);
    }

    #[test]
    fn unknown_atoms_are_reported() {
        let declared = set(&["a"]);
        let (_, warnings) = parse_ltl_checked("a U b", &declared).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("`b`"));
    }

    #[test]
    fn display_round_trips() {
        for text in ["a U (b || !c)", "G (F a) && X b", "(a R b) U c", "!(a && true)"] {
            let f = parse_ltl(text).unwrap();
            assert_eq!(parse_ltl(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn nnf_examples() {
        let p = |s| parse_ltl(s).unwrap();
        assert_eq!(to_nnf(&p("!(a U b)")), p("!a R !b"));
        assert_eq!(to_nnf(&p("F a")), p("true U a"));
        assert_eq!(to_nnf(&p("!!a")), p("a"));
        assert_eq!(to_nnf(&p("G a")), p("false R a"));
    }

    #[test]
    fn lasso_examples() {
        let p = |s| parse_ltl(s).unwrap();
        assert!(eval_lasso(&p("G x"), &[], &[set(&["x"])]).unwrap());
        assert!(!eval_lasso(&p("F y"), &[set(&[])], &[set(&[])]).unwrap());
        assert!(eval_lasso(&p("x U y"), &[set(&["x"]), set(&["x"])], &[set(&["y"])]).unwrap());
        assert_eq!(eval_lasso(&p("x"), &[], &[]), Err(EmptyCycle));
    }

    #[test]
    fn next_wraps_into_cycle() {
        let p = |s| parse_ltl(s).unwrap();
        // Word: {} ({x} {})^ω ; X X X x holds at position 0 (position 3 = {x}).
        let prefix = [set(&[])];
        let cycle = [set(&["x"]), set(&[])];
        assert!(eval_lasso(&p("X X X x"), &prefix, &cycle).unwrap());
        assert!(!eval_lasso(&p("X X x"), &prefix, &cycle).unwrap());
        assert!(eval_lasso(&p("G F x"), &prefix, &cycle).unwrap());
        assert!(!eval_lasso(&p("F G x"), &prefix, &cycle).unwrap());
    }
}
