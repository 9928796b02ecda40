//! Text format for models.
//!
//! ```text
//! states: p0 p1
//! gamma: a b
//! atoms: x
//! label p0 { x }
//! rule r1: p0 a -> p1 b a
//! crule c1: p1 ( r1 | r2 ) p0
//! rule r2: p1 b -> p0
//! phase0: r1 c1
//! init: p0 a
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::model::{Configuration, ControlId, RuleId, RuleKind, SmPds, SmPdsBuilder, SymbolId};
use crate::phase::RuleSet;

/// A model with its initial phase and configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelBundle {
    pub model: SmPds,
    pub theta0: RuleSet,
    pub c0: Configuration,
}

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let column = line[..i].chars().count() + 1;
        if c.is_whitespace() {
            chars.next();
        } else if "(){}|:".contains(c) {
            chars.next();
            out.push(Token { text: &line[i..i + c.len_utf8()], column });
        } else if line[i..].starts_with("->") {
            chars.next();
            chars.next();
            out.push(Token { text: &line[i..i + 2], column });
        } else {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if d.is_whitespace() || "(){}|:".contains(d) || line[j..].starts_with("->") {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
            out.push(Token { text: &line[i..end], column });
        }
    }
    out
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

impl<'a> Line<'a> {
    fn err_at(&self, i: usize, msg: impl Into<String>) -> ParseError {
        let column = self.tokens.get(i).map_or(self.end_column, |t| t.column);
        ParseError::new(self.number, column, msg)
    }

    fn expect(&self, i: usize, text: &str) -> Result<(), ParseError> {
        match self.tokens.get(i) {
            Some(t) if t.text == text => Ok(()),
            Some(t) => Err(self.err_at(i, format!("expected `{text}`, found `{}`", t.text))),
            None => Err(self.err_at(i, format!("expected `{text}`"))),
        }
    }

    fn word(&self, i: usize, what: &str) -> Result<&'a str, ParseError> {
        match self.tokens.get(i) {
            Some(t) if is_name(t.text) => Ok(t.text),
            Some(t) => Err(self.err_at(i, format!("expected {what}, found `{}`", t.text))),
            None => Err(self.err_at(i, format!("expected {what}"))),
        }
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && !matches!(s, "(" | ")" | "{" | "}" | "|" | ":" | "->")
}

struct Names {
    controls: HashMap<String, ControlId>,
    symbols: HashMap<String, SymbolId>,
    atoms: BTreeSet<String>,
    rules: HashMap<String, RuleId>,
}

impl Names {
    fn control(&self, line: &Line<'_>, i: usize) -> Result<ControlId, ParseError> {
        let name = line.word(i, "a state")?;
        self.controls
            .get(name)
            .copied()
            .ok_or_else(|| line.err_at(i, format!("unknown state `{name}`")))
    }

    fn symbol(&self, line: &Line<'_>, i: usize) -> Result<SymbolId, ParseError> {
        let name = line.word(i, "a stack symbol")?;
        self.symbols
            .get(name)
            .copied()
            .ok_or_else(|| line.err_at(i, format!("unknown stack symbol `{name}`")))
    }

    fn rule(&self, line: &Line<'_>, i: usize) -> Result<RuleId, ParseError> {
        let name = line.word(i, "a rule name")?;
        self.rules
            .get(name)
            .copied()
            .ok_or_else(|| line.err_at(i, format!("unknown rule `{name}`")))
    }
}

/// Parses a model file. Diagnostics carry line and column.
pub fn parse_model(text: &str) -> Result<ModelBundle, ParseError> {
    let lines: Vec<Line<'_>> = text
        .lines()
        .enumerate()
        .map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            Line {
                number: i + 1,
                tokens: tokenize(body),
                end_column: body.trim_end().chars().count() + 1,
            }
        })
        .filter(|l| !l.tokens.is_empty())
        .collect();

    // Pass 1: declarations and rule names, so rules may refer forward.
    let mut b = SmPdsBuilder::new();
    let mut names = Names {
        controls: HashMap::new(),
        symbols: HashMap::new(),
        atoms: BTreeSet::new(),
        rules: HashMap::new(),
    };
    for line in &lines {
        let head = line.tokens[0].text;
        if !matches!(head, "states" | "gamma" | "atoms" | "rule" | "crule") {
            continue;
        }
        if head == "rule" || head == "crule" {
            let name = line.word(1, "a rule name")?;
            let id = RuleId(names.rules.len() as u32);
            if names.rules.insert(name.to_string(), id).is_some() {
                return Err(line.err_at(1, format!("duplicate rule `{name}`")));
            }
            continue;
        }
        line.expect(1, ":")?;
        for i in 2..line.tokens.len() {
            let name = line.word(i, "a name")?;
            match head {
                "states" => {
                    if names.controls.contains_key(name) {
                        return Err(line.err_at(i, format!("duplicate state `{name}`")));
                    }
                    names.controls.insert(name.to_string(), b.control(name));
                }
                "gamma" => {
                    if names.symbols.contains_key(name) {
                        return Err(line.err_at(i, format!("duplicate stack symbol `{name}`")));
                    }
                    let id = b
                        .symbol(name)
                        .map_err(|_| line.err_at(i, format!("`{name}` is reserved")))?;
                    names.symbols.insert(name.to_string(), id);
                }
                _ => {
                    b.atom(name);
                    names.atoms.insert(name.to_string());
                }
            }
        }
    }

    // Pass 2: labels, rules, phase and initial configuration.
    let mut phase0 = None;
    let mut init = None;
    for line in &lines {
        let n = line.tokens.len();
        match line.tokens[0].text {
            "states" | "gamma" | "atoms" => {}
            "label" => {
                let c = names.control(line, 1)?;
                line.expect(2, "{")?;
                let mut i = 3;
                while i < n && line.tokens[i].text != "}" {
                    let atom = line.word(i, "an atom")?;
                    if !names.atoms.contains(atom) {
                        return Err(line.err_at(i, format!("unknown atom `{atom}`")));
                    }
                    b.label(c, atom);
                    i += 1;
                }
                line.expect(i, "}")?;
                if i + 1 < n {
                    return Err(line.err_at(i + 1, "unexpected token after label"));
                }
            }
            "rule" => {
                let name = line.word(1, "a rule name")?;
                line.expect(2, ":")?;
                let from = names.control(line, 3)?;
                let pop = names.symbol(line, 4)?;
                line.expect(5, "->")?;
                let to = names.control(line, 6)?;
                let push = (7..n)
                    .map(|i| names.symbol(line, i))
                    .collect::<Result<Vec<_>, _>>()?;
                if push.len() > 2 {
                    return Err(line.err_at(9, "push length exceeds 2"));
                }
                b.normal(name, from, pop, to, push)
                    .map_err(|e| line.err_at(1, e.to_string()))?;
            }
            "crule" => {
                let name = line.word(1, "a rule name")?;
                line.expect(2, ":")?;
                let from = names.control(line, 3)?;
                line.expect(4, "(")?;
                let mut i = 5;
                let mut remove = Vec::new();
                while i < n && line.tokens[i].text != "|" {
                    remove.push(names.rule(line, i)?);
                    i += 1;
                }
                line.expect(i, "|")?;
                i += 1;
                let mut add = Vec::new();
                while i < n && line.tokens[i].text != ")" {
                    add.push(names.rule(line, i)?);
                    i += 1;
                }
                line.expect(i, ")")?;
                let to = names.control(line, i + 1)?;
                if i + 2 < n {
                    return Err(line.err_at(i + 2, "unexpected token after target state"));
                }
                b.modifying(name, from, remove, add, to)
                    .map_err(|e| line.err_at(1, e.to_string()))?;
            }
            "phase0" => {
                line.expect(1, ":")?;
                let ids = (2..n)
                    .map(|i| names.rule(line, i))
                    .collect::<Result<Vec<_>, _>>()?;
                phase0 = Some(ids);
            }
            "init" => {
                line.expect(1, ":")?;
                let c = names.control(line, 2)?;
                let stack = (3..n)
                    .map(|i| names.symbol(line, i))
                    .collect::<Result<Vec<_>, _>>()?;
                init = Some((c, stack));
            }
            other => {
                return Err(line.err_at(0, format!("unknown directive `{other}`")));
            }
        }
    }
    let last = text.lines().count().max(1);
    let phase0 = phase0.ok_or_else(|| ParseError::new(last, 1, "missing phase0"))?;
    let (control, stack) = init.ok_or_else(|| ParseError::new(last, 1, "missing init"))?;
    let model = b.build().map_err(|e| ParseError::new(last, 1, e.to_string()))?;
    let theta0 = RuleSet::from_ids(model.num_rules(), phase0);
    let c0 = Configuration::new(control, stack, theta0.clone());
    Ok(ModelBundle { model, theta0, c0 })
}

/// Prints a bundle so that [`parse_model`] reads it back unchanged.
pub fn print_model(bundle: &ModelBundle) -> String {
    let m = &bundle.model;
    let mut out = String::new();
    let join = |it: &mut dyn Iterator<Item = &str>| it.collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "states: {}", join(&mut m.controls().map(|c| m.control_name(c))));
    let _ = writeln!(out, "gamma: {}", join(&mut m.symbols().map(|s| m.symbol_name(s))));
    if !m.atoms().is_empty() {
        let _ = writeln!(out, "atoms: {}", join(&mut m.atoms().iter().map(String::as_str)));
    }
    for c in m.controls() {
        if !m.label(c).is_empty() {
            let atoms = join(&mut m.label(c).iter().map(String::as_str));
            let _ = writeln!(out, "label {} {{ {atoms} }}", m.control_name(c));
        }
    }
    for (_, rule) in m.rules() {
        match &rule.kind {
            RuleKind::Normal(r) => {
                let _ = write!(
                    out,
                    "rule {}: {} {} -> {}",
                    rule.name,
                    m.control_name(r.from),
                    m.symbol_name(r.pop),
                    m.control_name(r.to)
                );
                for &s in &r.push {
                    let _ = write!(out, " {}", m.symbol_name(s));
                }
                out.push('\n');
            }
            RuleKind::Modifying(r) => {
                let names = |set: &RuleSet| {
                    set.iter().map(|x| format!("{} ", m.rule_name(x))).collect::<String>()
                };
                let _ = writeln!(
                    out,
                    "crule {}: {} ( {}| {}) {}",
                    rule.name,
                    m.control_name(r.from),
                    names(&r.remove),
                    names(&r.add),
                    m.control_name(r.to)
                );
            }
        }
    }
    let phase: Vec<&str> = bundle.theta0.iter().map(|r| m.rule_name(r)).collect();
    let _ = writeln!(out, "phase0: {}", phase.join(" "));
    let _ = write!(out, "init: {}", m.control_name(bundle.c0.control));
    for &s in &bundle.c0.stack[..bundle.c0.height()] {
        let _ = write!(out, " {}", m.symbol_name(s));
    }
    out.push('\n');
    out
}

/// A model file with the generator seed and formula recorded as comments,
/// for reproducing a failing instance.
pub fn failure_artifact(bundle: &ModelBundle, seed: u64, ltl: &str) -> String {
    format!("# seed: {seed}\n# ltl: {ltl}\n{}", print_model(bundle))
}
