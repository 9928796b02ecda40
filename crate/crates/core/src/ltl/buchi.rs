//! Büchi automata over guards on atomic propositions, and the tableau
//! translation from LTL.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::graph::{can_reach, strongly_connected};
use crate::ltl::formula::{AtomSet, Formula};

/// A guard denotes every atom set containing `positive` and avoiding
/// `negative`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionGuard {
    pub positive: BTreeSet<String>,
    pub negative: BTreeSet<String>,
}

impl TransitionGuard {
    pub fn universal() -> Self {
        Self::default()
    }

    /// Returns `None` when the literal sets contradict each other.
    pub fn new(positive: BTreeSet<String>, negative: BTreeSet<String>) -> Option<Self> {
        if positive.intersection(&negative).next().is_some() {
            return None;
        }
        Some(TransitionGuard { positive, negative })
    }

    pub fn matches(&self, atoms: &AtomSet) -> bool {
        guard_matches(self, atoms)
    }
}

pub fn guard_matches(g: &TransitionGuard, atoms: &AtomSet) -> bool {
    g.positive.is_subset(atoms) && g.negative.is_disjoint(atoms)
}

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuchiTransition {
    pub src: StateId,
    pub guard: TransitionGuard,
    pub dst: StateId,
}

/// A Büchi automaton with state-based acceptance. Transitions consume one
/// atom set each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuchiAutomaton {
    pub states: Vec<String>,
    pub initial: StateId,
    pub accepting: Vec<bool>,
    pub transitions: Vec<BuchiTransition>,
}

impl BuchiAutomaton {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    fn step(&self, from: &[bool], letter: &AtomSet) -> Vec<bool> {
        let mut out = vec![false; self.num_states()];
        for t in &self.transitions {
            if from[t.src] && t.guard.matches(letter) {
                out[t.dst] = true;
            }
        }
        out
    }

    /// States reachable from the initial state after reading `word`.
    pub fn run_prefix(&self, word: &[AtomSet]) -> Vec<bool> {
        let mut cur = vec![false; self.num_states()];
        cur[self.initial] = true;
        for letter in word {
            cur = self.step(&cur, letter);
        }
        cur
    }

    /// States from which `cycle^ω` has an accepting run.
    pub fn cycle_acceptors(&self, cycle: &[AtomSet]) -> Vec<bool> {
        let n = self.num_states();
        let k = cycle.len();
        let node = |q: StateId, pos: usize| q * k + pos;
        let mut edges = Vec::new();
        for t in &self.transitions {
            for (pos, letter) in cycle.iter().enumerate() {
                if t.guard.matches(letter) {
                    edges.push((node(t.src, pos), node(t.dst, (pos + 1) % k)));
                }
            }
        }
        let accepting = |v: usize| self.accepting[v / k];
        let good = accepting_cycle_nodes(n * k, &edges, |scc| scc.iter().any(|&v| accepting(v)));
        (0..n).map(|q| good[node(q, 0)]).collect()
    }

    /// Whether the automaton accepts `prefix · cycle^ω`.
    pub fn accepts_lasso(&self, prefix: &[AtomSet], cycle: &[AtomSet]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let reach = self.run_prefix(prefix);
        let good = self.cycle_acceptors(cycle);
        reach.iter().zip(&good).any(|(r, g)| *r && *g)
    }

    /// Serializes in the line-oriented automaton file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (q, name) in self.states.iter().enumerate() {
            let _ = write!(out, "state {name}");
            if q == self.initial {
                out.push_str(" init");
            }
            if self.accepting[q] {
                out.push_str(" accept");
            }
            out.push('\n');
        }
        for t in &self.transitions {
            let _ = write!(out, "{} -> {}", self.states[t.src], self.states[t.dst]);
            if !t.guard.positive.is_empty() {
                let atoms: Vec<&str> = t.guard.positive.iter().map(String::as_str).collect();
                let _ = write!(out, " [pos: {}]", atoms.join(" "));
            }
            if !t.guard.negative.is_empty() {
                let atoms: Vec<&str> = t.guard.negative.iter().map(String::as_str).collect();
                let _ = write!(out, " [neg: {}]", atoms.join(" "));
            }
            out.push('\n');
        }
        out
    }
}

/// Marks nodes that can reach a nontrivial SCC satisfying `good_scc`.
fn accepting_cycle_nodes(
    n: usize,
    edges: &[(usize, usize)],
    good_scc: impl Fn(&[usize]) -> bool,
) -> Vec<bool> {
    let comps = strongly_connected(n, edges);
    let mut has_inner_edge = vec![false; comps.count];
    for &(u, v) in edges {
        if comps.id[u] == comps.id[v] {
            has_inner_edge[comps.id[u]] = true;
        }
    }
    let mut targets = vec![false; n];
    for (c, members) in comps.members().iter().enumerate() {
        if has_inner_edge[c] && good_scc(members) {
            for &v in members {
                targets[v] = true;
            }
        }
    }
    can_reach(n, edges, &targets)
}

/// Parses the automaton file format:
///
/// ```text
/// state q0 init
/// state q1 accept
/// q0 -> q1 [pos: a b] [neg: c]
/// ```
pub fn parse_buchi(text: &str) -> Result<BuchiAutomaton, ParseError> {
    let mut states: Vec<String> = Vec::new();
    let mut index: HashMap<String, StateId> = HashMap::new();
    let mut accepting = Vec::new();
    let mut initial = None;
    let mut transitions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| ParseError::new(line_no, 1, msg);
        if let Some(rest) = line.strip_prefix("state ") {
            let mut words = rest.split_whitespace();
            let name = words.next().ok_or_else(|| err("missing state name".into()))?;
            if index.contains_key(name) {
                return Err(err(format!("duplicate state `{name}`")));
            }
            let id = states.len();
            states.push(name.to_string());
            index.insert(name.to_string(), id);
            accepting.push(false);
            for flag in words {
                match flag {
                    "init" => {
                        if initial.replace(id).is_some() {
                            return Err(err("more than one initial state".into()));
                        }
                    }
                    "accept" => accepting[id] = true,
                    other => return Err(err(format!("unknown state flag `{other}`"))),
                }
            }
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| err("expected `state` or a transition".into()))?;
        let src = lhs.trim();
        let rhs = rhs.trim();
        let (dst, mut guards) = match rhs.find('[') {
            Some(i) => (rhs[..i].trim(), &rhs[i..]),
            None => (rhs, ""),
        };
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| err(format!("unknown state `{name}`")))
        };
        let (src, dst) = (lookup(src)?, lookup(dst)?);
        let mut positive = BTreeSet::new();
        let mut negative = BTreeSet::new();
        while !guards.is_empty() {
            let close = guards
                .find(']')
                .ok_or_else(|| err("unterminated guard".into()))?;
            let body = guards[1..close].trim();
            let (kind, atoms) = body
                .split_once(':')
                .ok_or_else(|| err(format!("malformed guard `{body}`")))?;
            let target = match kind.trim() {
                "pos" => &mut positive,
                "neg" => &mut negative,
                other => return Err(err(format!("unknown guard kind `{other}`"))),
            };
            target.extend(atoms.split_whitespace().map(str::to_string));
            guards = guards[close + 1..].trim_start();
        }
        let guard = TransitionGuard::new(positive, negative)
            .ok_or_else(|| err("guard is contradictory".into()))?;
        transitions.push(BuchiTransition { src, guard, dst });
    }
    let initial = initial.ok_or_else(|| ParseError::new(1, 1, "missing initial state"))?;
    Ok(BuchiAutomaton {
        states,
        initial,
        accepting,
        transitions,
    })
}

// ---------------------------------------------------------------------------
// Generalized Büchi automata and the tableau construction

/// A Büchi automaton with several acceptance sets; a run is accepting when
/// it visits every set infinitely often.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedBuchi {
    pub num_states: usize,
    pub initial: StateId,
    pub transitions: Vec<BuchiTransition>,
    pub acceptance: Vec<Vec<bool>>,
}

impl GeneralizedBuchi {
    pub fn accepts_lasso(&self, prefix: &[AtomSet], cycle: &[AtomSet]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let k = cycle.len();
        let n = self.num_states;
        let node = |q: StateId, pos: usize| q * k + pos;
        let mut edges = Vec::new();
        for t in &self.transitions {
            for (pos, letter) in cycle.iter().enumerate() {
                if t.guard.matches(letter) {
                    edges.push((node(t.src, pos), node(t.dst, (pos + 1) % k)));
                }
            }
        }
        let good = accepting_cycle_nodes(n * k, &edges, |scc| {
            self.acceptance
                .iter()
                .all(|set| scc.iter().any(|&v| set[v / k]))
        });
        let mut cur = vec![false; n];
        cur[self.initial] = true;
        for letter in prefix {
            let mut next = vec![false; n];
            for t in &self.transitions {
                if cur[t.src] && t.guard.matches(letter) {
                    next[t.dst] = true;
                }
            }
            cur = next;
        }
        (0..n).any(|q| cur[q] && good[node(q, 0)])
    }
}

type Sub = usize;

/// Subformulas of an NNF formula, interned so tableau nodes can hold sets of
/// indices.
struct Closure {
    subs: Vec<Formula>,
    index: HashMap<Formula, Sub>,
}

impl Closure {
    /// Interns `f` together with all of its subformulas.
    fn id(&mut self, f: &Formula) -> Sub {
        if let Some(&i) = self.index.get(f) {
            return i;
        }
        match f {
            Formula::True | Formula::False | Formula::Atom(_) => {}
            Formula::Not(a) | Formula::Next(a) | Formula::Eventually(a) | Formula::Globally(a) => {
                self.id(a);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
                self.id(a);
                self.id(b);
            }
        }
        let i = self.subs.len();
        self.subs.push(f.clone());
        self.index.insert(f.clone(), i);
        i
    }
}

#[derive(Clone)]
struct Node {
    incoming: BTreeSet<usize>,
    new: BTreeSet<Sub>,
    old: BTreeSet<Sub>,
    next: BTreeSet<Sub>,
}

const INIT: usize = usize::MAX;

struct Tableau {
    closure: Closure,
    nodes: Vec<Node>,
}

impl Tableau {
    fn expand(&mut self, mut node: Node) {
        while let Some(&eta) = node.new.iter().next() {
            node.new.remove(&eta);
            if node.old.contains(&eta) {
                continue;
            }
            let f = self.closure.subs[eta].clone();
            match &f {
                Formula::False => return,
                Formula::True => {
                    node.old.insert(eta);
                }
                Formula::Atom(_) | Formula::Not(_) => {
                    let neg = match &f {
                        Formula::Atom(_) => Formula::not(f.clone()),
                        Formula::Not(inner) => (**inner).clone(),
                        _ => unreachable!(),
                    };
                    if let Some(&n) = self.closure.index.get(&neg) {
                        if node.old.contains(&n) {
                            return;
                        }
                    }
                    node.old.insert(eta);
                }
                Formula::And(a, b) => {
                    for g in [a, b] {
                        let id = self.closure.id(g);
                        if !node.old.contains(&id) {
                            node.new.insert(id);
                        }
                    }
                    node.old.insert(eta);
                }
                Formula::Next(a) => {
                    let id = self.closure.id(a);
                    node.next.insert(id);
                    node.old.insert(eta);
                }
                Formula::Or(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
                    let (a, b) = (self.closure.id(a), self.closure.id(b));
                    let mut first = node.clone();
                    let mut second = node;
                    first.old.insert(eta);
                    second.old.insert(eta);
                    match &f {
                        Formula::Or(..) => {
                            first.new.insert(a);
                            second.new.insert(b);
                        }
                        Formula::Until(..) => {
                            first.new.insert(a);
                            first.next.insert(eta);
                            second.new.insert(b);
                        }
                        _ => {
                            first.new.insert(b);
                            first.next.insert(eta);
                            second.new.insert(a);
                            second.new.insert(b);
                        }
                    }
                    for n in [&mut first, &mut second] {
                        let pending: Vec<Sub> = n.new.intersection(&n.old).copied().collect();
                        for p in pending {
                            n.new.remove(&p);
                        }
                    }
                    self.expand(first);
                    self.expand(second);
                    return;
                }
                Formula::Eventually(_) | Formula::Globally(_) => {
                    panic!("tableau input must be in negation normal form")
                }
            }
        }
        if let Some(existing) = self
            .nodes
            .iter_mut()
            .find(|n| n.old == node.old && n.next == node.next)
        {
            existing.incoming.extend(node.incoming);
            return;
        }
        let id = self.nodes.len();
        let successor = Node {
            incoming: BTreeSet::from([id]),
            new: node.next.clone(),
            old: BTreeSet::new(),
            next: BTreeSet::new(),
        };
        self.nodes.push(node);
        self.expand(successor);
    }

    fn guard(&self, node: &Node) -> Option<TransitionGuard> {
        let mut positive = BTreeSet::new();
        let mut negative = BTreeSet::new();
        for &s in &node.old {
            match &self.closure.subs[s] {
                Formula::Atom(a) => {
                    positive.insert(a.clone());
                }
                Formula::Not(inner) => {
                    if let Formula::Atom(a) = &**inner {
                        negative.insert(a.clone());
                    }
                }
                _ => {}
            }
        }
        TransitionGuard::new(positive, negative)
    }
}

/// Tableau construction: one state per tableau node plus a fresh initial
/// state, one acceptance set per U-subformula. The guard of a transition is
/// the literal set of its target node.
pub fn ltl_to_generalized(f: &Formula) -> GeneralizedBuchi {
    assert!(f.is_nnf(), "ltl_to_buchi expects a formula in negation normal form");
    let mut closure = Closure {
        subs: Vec::new(),
        index: HashMap::new(),
    };
    let root = closure.id(f);
    let mut tableau = Tableau {
        closure,
        nodes: Vec::new(),
    };
    tableau.expand(Node {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    });
    // State 0 is the initial state, tableau node i becomes state i + 1.
    let num_states = tableau.nodes.len() + 1;
    let mut transitions = Vec::new();
    for (i, node) in tableau.nodes.iter().enumerate() {
        let Some(guard) = tableau.guard(node) else {
            continue;
        };
        for &src in &node.incoming {
            let src = if src == INIT { 0 } else { src + 1 };
            transitions.push(BuchiTransition {
                src,
                guard: guard.clone(),
                dst: i + 1,
            });
        }
    }
    let untils: Vec<(Sub, Sub)> = tableau
        .closure
        .subs
        .iter()
        .enumerate()
        .filter_map(|(i, g)| match g {
            Formula::Until(_, b) => Some((i, tableau.closure.index[&**b])),
            _ => None,
        })
        .collect();
    let acceptance = untils
        .iter()
        .map(|&(u, rhs)| {
            let mut set = vec![false; num_states];
            for (i, node) in tableau.nodes.iter().enumerate() {
                set[i + 1] = node.old.contains(&rhs) || !node.old.contains(&u);
            }
            set
        })
        .collect();
    GeneralizedBuchi {
        num_states,
        initial: 0,
        transitions,
        acceptance,
    }
}

/// Counter-based degeneralization. State `(q, i)` waits for acceptance set
/// `i`; level `k` (all sets seen) is the accepting level and resets to 0.
pub fn degeneralize(gba: &GeneralizedBuchi) -> BuchiAutomaton {
    let k = gba.acceptance.len();
    if k == 0 {
        return BuchiAutomaton {
            states: (0..gba.num_states).map(|q| format!("q{q}")).collect(),
            initial: gba.initial,
            accepting: vec![true; gba.num_states],
            transitions: gba.transitions.clone(),
        };
    }
    let levels = k + 1;
    let id = |q: StateId, level: usize| q * levels + level;
    let advance = |q: StateId, level: usize| {
        let mut l = if level == k { 0 } else { level };
        while l < k && gba.acceptance[l][q] {
            l += 1;
        }
        l
    };
    let mut transitions = Vec::new();
    for t in &gba.transitions {
        for level in 0..levels {
            transitions.push(BuchiTransition {
                src: id(t.src, level),
                guard: t.guard.clone(),
                dst: id(t.dst, advance(t.dst, level)),
            });
        }
    }
    let n = gba.num_states * levels;
    BuchiAutomaton {
        states: (0..n).map(|s| format!("q{}_{}", s / levels, s % levels)).collect(),
        initial: id(gba.initial, 0),
        accepting: (0..n).map(|s| s % levels == k).collect(),
        transitions,
    }
}

/// A state's current block and its outgoing (guard, target block) pairs.
type Signature<'a> = (usize, BTreeSet<(&'a TransitionGuard, usize)>);

/// Drops states that are unreachable or cannot reach an accepting cycle,
/// then merges bisimilar states. The language is unchanged.
pub fn simplify(ba: &BuchiAutomaton) -> BuchiAutomaton {
    let n = ba.num_states();
    let edges: Vec<(usize, usize)> = ba.transitions.iter().map(|t| (t.src, t.dst)).collect();
    let mut init = vec![false; n];
    init[ba.initial] = true;
    let reversed: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (v, u)).collect();
    let reachable = can_reach(n, &reversed, &init);
    let live = accepting_cycle_nodes(n, &edges, |scc| scc.iter().any(|&v| ba.accepting[v]));
    let keep: Vec<bool> = (0..n).map(|q| reachable[q] && live[q]).collect();
    if !keep[ba.initial] {
        return BuchiAutomaton {
            states: vec!["q0".to_string()],
            initial: 0,
            accepting: vec![false],
            transitions: Vec::new(),
        };
    }
    let transitions: Vec<&BuchiTransition> = ba
        .transitions
        .iter()
        .filter(|t| keep[t.src] && keep[t.dst])
        .collect();

    // Partition refinement on (accepting, {(guard, block of target)}).
    let mut block: Vec<usize> = (0..n).map(|q| usize::from(ba.accepting[q])).collect();
    loop {
        let mut signatures: BTreeMap<Signature, usize> = BTreeMap::new();
        let mut next_block = vec![usize::MAX; n];
        for q in (0..n).filter(|&q| keep[q]) {
            let out: BTreeSet<(&TransitionGuard, usize)> = transitions
                .iter()
                .filter(|t| t.src == q)
                .map(|t| (&t.guard, block[t.dst]))
                .collect();
            let fresh = signatures.len();
            next_block[q] = *signatures.entry((block[q], out)).or_insert(fresh);
        }
        let before = (0..n).filter(|&q| keep[q]).map(|q| block[q]).collect::<BTreeSet<_>>().len();
        let stable = signatures.len() == before;
        block = next_block;
        if stable {
            break;
        }
    }
    // Renumber blocks in order of first appearance from the initial state.
    let mut order: HashMap<usize, usize> = HashMap::new();
    order.insert(block[ba.initial], 0);
    for q in (0..n).filter(|&q| keep[q]) {
        let next = order.len();
        order.entry(block[q]).or_insert(next);
    }
    let m = order.len();
    let mut accepting = vec![false; m];
    for q in (0..n).filter(|&q| keep[q]) {
        accepting[order[&block[q]]] = ba.accepting[q];
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in transitions {
        let key = (order[&block[t.src]], t.guard.clone(), order[&block[t.dst]]);
        if seen.insert(key.clone()) {
            out.push(BuchiTransition {
                src: key.0,
                guard: key.1,
                dst: key.2,
            });
        }
    }
    BuchiAutomaton {
        states: (0..m).map(|q| format!("q{q}")).collect(),
        initial: 0,
        accepting,
        transitions: out,
    }
}

/// Translates an NNF formula into a Büchi automaton accepting exactly the
/// words satisfying it.
pub fn ltl_to_buchi(f: &Formula) -> BuchiAutomaton {
    simplify(&degeneralize(&ltl_to_generalized(f)))
}
