//! Labelled automata over stack symbols and the saturation procedure that
//! computes predecessor sets with a G-visit bit.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::model::{
    Configuration, ControlId, Head, ReachablePhases, RuleId, SmBpds, SymbolId, BOTTOM,
};
use crate::phase::{PhaseId, PhaseTable};

/// A state of a [`LabeledAutomaton`]: either a pair (p, θ) or an auxiliary
/// state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AState(pub u32);

impl AState {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Control(ControlId, PhaseId),
    Aux(usize),
}

pub type TransId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: AState,
    pub symbol: SymbolId,
    pub bit: bool,
    pub dst: AState,
}

/// Why a transition is present. Every derived transition points at
/// transitions with smaller ids, so derivations form a finite tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// Part of the automaton before saturation.
    Seed,
    /// Pop rule ⟨p,γ⟩↪⟨p1,ε⟩.
    Pop { rule: RuleId },
    /// Swap rule ⟨p,γ⟩↪⟨p1,γ1⟩ followed by `via`.
    Swap { rule: RuleId, via: TransId },
    /// Push rule ⟨p,γ⟩↪⟨p1,γ1γ2⟩ followed by `first` (γ1) then `second` (γ2).
    Push {
        rule: RuleId,
        first: TransId,
        second: TransId,
    },
    /// Modifying rule followed by `via` in the rewritten phase.
    Modify { rule: RuleId, via: TransId },
}

/// A finite automaton over stack symbols whose transitions carry a bit.
/// States `0..|P|·|phases|` are the pairs (p, θ); auxiliary states follow.
#[derive(Clone, Debug)]
pub struct LabeledAutomaton {
    num_controls: usize,
    phases: PhaseTable,
    aux: Vec<String>,
    transitions: Vec<Transition>,
    derivations: Vec<Derivation>,
    index: HashMap<Transition, TransId>,
    out: HashMap<(AState, SymbolId), Vec<TransId>>,
    initial: BTreeSet<AState>,
    finals: BTreeSet<AState>,
}

impl LabeledAutomaton {
    pub fn new(num_controls: usize, phases: PhaseTable) -> Self {
        LabeledAutomaton {
            num_controls,
            phases,
            aux: Vec::new(),
            transitions: Vec::new(),
            derivations: Vec::new(),
            index: HashMap::new(),
            out: HashMap::new(),
            initial: BTreeSet::new(),
            finals: BTreeSet::new(),
        }
    }

    pub fn phases(&self) -> &PhaseTable {
        &self.phases
    }

    pub fn num_states(&self) -> usize {
        self.num_controls * self.phases.len() + self.aux.len()
    }

    pub fn control_state(&self, p: ControlId, theta: PhaseId) -> AState {
        AState((p.index() * self.phases.len() + theta.index()) as u32)
    }

    pub fn add_aux(&mut self, name: &str) -> AState {
        let s = AState(self.num_states() as u32);
        self.aux.push(name.to_string());
        s
    }

    pub fn kind(&self, s: AState) -> StateKind {
        let n = self.num_controls * self.phases.len();
        if s.index() < n {
            let nph = self.phases.len();
            StateKind::Control(
                ControlId((s.index() / nph) as u32),
                PhaseId((s.index() % nph) as u32),
            )
        } else {
            StateKind::Aux(s.index() - n)
        }
    }

    pub fn state_name(&self, s: AState, model: &SmBpds) -> String {
        match self.kind(s) {
            StateKind::Control(p, theta) => format!("({},θ{})", model.control_name(p), theta.0),
            StateKind::Aux(i) => self.aux[i].clone(),
        }
    }

    pub fn set_initial(&mut self, s: AState) {
        self.initial.insert(s);
    }

    pub fn set_final(&mut self, s: AState) {
        self.finals.insert(s);
    }

    pub fn clear_finals(&mut self) {
        self.finals.clear();
    }

    pub fn initial(&self) -> &BTreeSet<AState> {
        &self.initial
    }

    pub fn is_final(&self, s: AState) -> bool {
        self.finals.contains(&s)
    }

    /// Adds `t` unless it is already present; returns the id of a new
    /// transition.
    pub fn add(&mut self, t: Transition, why: Derivation) -> Option<TransId> {
        if self.index.contains_key(&t) {
            return None;
        }
        let id = self.transitions.len() as TransId;
        self.transitions.push(t);
        self.derivations.push(why);
        self.index.insert(t, id);
        self.out.entry((t.src, t.symbol)).or_default().push(id);
        Some(id)
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn transition(&self, id: TransId) -> Transition {
        self.transitions[id as usize]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn derivation(&self, id: TransId) -> Derivation {
        self.derivations[id as usize]
    }

    pub fn contains(&self, t: &Transition) -> bool {
        self.index.contains_key(t)
    }

    pub fn find(&self, t: &Transition) -> Option<TransId> {
        self.index.get(t).copied()
    }

    pub fn out(&self, s: AState, symbol: SymbolId) -> &[TransId] {
        self.out.get(&(s, symbol)).map_or(&[], Vec::as_slice)
    }

    /// All (state, bit) pairs reachable from `start` by reading `word`. The
    /// bit is the OR of the edge bits along the path.
    pub fn run(&self, start: AState, word: &[SymbolId]) -> BTreeSet<(AState, bool)> {
        let mut cur = BTreeSet::from([(start, false)]);
        for &symbol in word {
            let mut next = BTreeSet::new();
            for &(s, b) in &cur {
                for &t in self.out(s, symbol) {
                    let t = self.transition(t);
                    next.insert((t.dst, b || t.bit));
                }
            }
            cur = next;
        }
        cur
    }

    /// The bits b such that `word` leads from `start` to a final state with
    /// label b.
    pub fn accepts_word(&self, start: AState, word: &[SymbolId]) -> BTreeSet<bool> {
        self.run(start, word)
            .into_iter()
            .filter(|(s, _)| self.is_final(*s))
            .map(|(_, b)| b)
            .collect()
    }

    /// The bits with which the whole configuration, bottom symbol included,
    /// is accepted. Any (p, θ) state may start a path, since saturation
    /// makes every state with outgoing transitions initial. Phases outside
    /// the table are never accepted.
    pub fn accepts(&self, c: &Configuration) -> BTreeSet<bool> {
        match self.phases.lookup(&c.phase) {
            Some(theta) if c.control.index() < self.num_controls => {
                self.accepts_word(self.control_state(c.control, theta), &c.stack)
            }
            _ => BTreeSet::new(),
        }
    }

    /// One accepting path for `word` from `start`, as transition ids.
    pub fn accepting_path(&self, start: AState, word: &[SymbolId]) -> Option<Vec<TransId>> {
        // Layered search with back pointers: layer i holds the states after
        // reading i symbols.
        let mut layers: Vec<HashMap<AState, Option<TransId>>> = vec![HashMap::from([(start, None)])];
        for &symbol in word {
            let mut next = HashMap::new();
            let mut states: Vec<AState> = layers.last().unwrap().keys().copied().collect();
            states.sort();
            for s in states {
                for &t in self.out(s, symbol) {
                    next.entry(self.transition(t).dst).or_insert(Some(t));
                }
            }
            layers.push(next);
        }
        let mut end = layers
            .last()
            .unwrap()
            .keys()
            .copied()
            .filter(|s| self.is_final(*s))
            .min()?;
        let mut path = Vec::new();
        for layer in layers.iter().rev().take(word.len()) {
            let t = layer[&end].expect("back pointer");
            path.push(t);
            end = self.transition(t).src;
        }
        path.reverse();
        Some(path)
    }

    /// Rule sequence realizing transition `t`: starting from (⟨p,γ⟩,θ) at
    /// its source, the rules lead to its target state with the stack
    /// consumed (or, for transitions into an auxiliary state, to a seed
    /// transition's head). Returns `None` when the sequence exceeds `limit`.
    pub fn replay(&self, t: TransId, limit: usize) -> Option<Vec<RuleId>> {
        let mut out = Vec::new();
        let mut stack = vec![t];
        while let Some(t) = stack.pop() {
            if out.len() > limit {
                return None;
            }
            match self.derivation(t) {
                Derivation::Seed => {}
                Derivation::Pop { rule } => out.push(rule),
                Derivation::Swap { rule, via } | Derivation::Modify { rule, via } => {
                    out.push(rule);
                    stack.push(via);
                }
                Derivation::Push {
                    rule,
                    first,
                    second,
                } => {
                    out.push(rule);
                    stack.push(second);
                    stack.push(first);
                }
            }
        }
        (out.len() <= limit).then_some(out)
    }

    /// DOT rendering; edge label "γ/b", bit 1 solid and bit 0 dashed.
    pub fn to_dot(&self, model: &SmBpds) -> String {
        let mut out = String::from("digraph pre_star {\n  rankdir=LR;\n");
        let mut used: BTreeSet<AState> = BTreeSet::new();
        for t in &self.transitions {
            used.insert(t.src);
            used.insert(t.dst);
        }
        used.extend(self.initial.iter().copied());
        used.extend(self.finals.iter().copied());
        for s in &used {
            let shape = if self.is_final(*s) { "doublecircle" } else { "circle" };
            let _ = writeln!(
                out,
                "  s{} [label=\"{}\", shape={}];",
                s.0,
                escape(&self.state_name(*s, model)),
                shape
            );
        }
        let mut edges: Vec<&Transition> = self.transitions.iter().collect();
        edges.sort();
        for t in edges {
            let style = if t.bit { "solid" } else { "dashed" };
            let _ = writeln!(
                out,
                "  s{} -> s{} [label=\"{}/{}\", style={}];",
                t.src.0,
                t.dst.0,
                escape(model.symbol_name(t.symbol)),
                u8::from(t.bit),
                style
            );
        }
        out.push_str(&phase_legend(&self.phases, model));
        out.push_str("}\n");
        out
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(crate) fn phase_legend(phases: &PhaseTable, model: &SmBpds) -> String {
    let mut lines = String::new();
    for (id, set) in phases.iter() {
        let names: Vec<&str> = set
            .iter()
            .filter(|r| r.index() < model.num_rules() && !model.rule(*r).synthetic)
            .map(|r| model.rule_name(r))
            .collect();
        let _ = write!(lines, "θ{} = {{{}}}\\l", id.0, escape(&names.join(", ")));
    }
    format!("  legend [shape=note, label=\"{lines}\"];\n")
}

#[derive(Clone, Debug)]
struct Mid {
    src: AState,
    symbol: SymbolId,
    bit: bool,
    rule: RuleId,
    first: TransId,
}

type SwapInto = (RuleId, ControlId, SymbolId);
type PushInto = (RuleId, ControlId, SymbolId, SymbolId);

/// Incremental saturation engine. Transitions may be added between runs;
/// the result is the least automaton closed under the saturation rules.
#[derive(Clone, Debug)]
pub struct Saturation<'m> {
    model: &'m SmBpds,
    /// Phase predecessors: for target phase θ, the (rule, θ′) pairs where
    /// modifying `rule` rewrites θ′ into θ.
    pre_edges: Vec<Vec<(RuleId, PhaseId)>>,
    /// Keyed by (p1, γ1): swap rules ⟨p,γ⟩↪⟨p1,γ1⟩ as (rule, p, γ).
    swap_into: HashMap<(ControlId, SymbolId), Vec<SwapInto>>,
    /// Keyed by (p1, γ1): push rules ⟨p,γ⟩↪⟨p1,γ1γ2⟩ as (rule, p, γ, γ2).
    push_into: HashMap<(ControlId, SymbolId), Vec<PushInto>>,
    automaton: LabeledAutomaton,
    mids: HashMap<(AState, SymbolId), Vec<Mid>>,
    queue: VecDeque<TransId>,
}

impl<'m> Saturation<'m> {
    /// Starts from `automaton`, whose phase table must be that of `phases`.
    /// Pop rules are seeded immediately.
    pub fn new(model: &'m SmBpds, phases: &ReachablePhases, automaton: LabeledAutomaton) -> Self {
        let mut pre_edges = vec![Vec::new(); phases.len()];
        for &(from, rule, to) in &phases.edges {
            pre_edges[to.index()].push((rule, from));
        }
        let mut swap_into: HashMap<_, Vec<_>> = HashMap::new();
        let mut push_into: HashMap<_, Vec<_>> = HashMap::new();
        for (id, r) in model.normal_rules() {
            match r.push[..] {
                [g1] => swap_into.entry((r.to, g1)).or_default().push((id, r.from, r.pop)),
                [g1, g2] => push_into
                    .entry((r.to, g1))
                    .or_default()
                    .push((id, r.from, r.pop, g2)),
                _ => {}
            }
        }
        let queue = (0..automaton.len() as TransId).collect();
        let mut engine = Saturation {
            model,
            pre_edges,
            swap_into,
            push_into,
            automaton,
            mids: HashMap::new(),
            queue,
        };
        let pops: Vec<(RuleId, ControlId, SymbolId, ControlId)> = model
            .normal_rules()
            .filter(|(_, r)| r.push.is_empty())
            .map(|(id, r)| (id, r.from, r.pop, r.to))
            .collect();
        let table = engine.automaton.phases.clone();
        for (theta, set) in table.iter() {
            for &(rule, from, pop, to) in &pops {
                if set.contains(rule) {
                    let t = Transition {
                        src: engine.automaton.control_state(from, theta),
                        symbol: pop,
                        bit: model.flag(from),
                        dst: engine.automaton.control_state(to, theta),
                    };
                    engine.push(t, Derivation::Pop { rule });
                }
            }
        }
        engine
    }

    pub fn automaton(&self) -> &LabeledAutomaton {
        &self.automaton
    }

    pub fn automaton_mut(&mut self) -> &mut LabeledAutomaton {
        &mut self.automaton
    }

    pub fn into_automaton(self) -> LabeledAutomaton {
        self.automaton
    }

    /// Adds a transition and schedules it for processing.
    pub fn push(&mut self, t: Transition, why: Derivation) {
        if let Some(id) = self.automaton.add(t, why) {
            self.queue.push_back(id);
        }
    }

    /// Runs to the fixpoint.
    pub fn run(&mut self) {
        while let Some(id) = self.queue.pop_front() {
            self.process(id);
        }
    }

    fn process(&mut self, id: TransId) {
        let t = self.automaton.transition(id);
        let model = self.model;
        if let StateKind::Control(p1, theta) = self.automaton.kind(t.src) {
            let set = self.automaton.phases.get(theta).clone();
            if let Some(rules) = self.swap_into.get(&(p1, t.symbol)) {
                let rules = rules.clone();
                for (rule, from, pop) in rules {
                    if set.contains(rule) {
                        let new = Transition {
                            src: self.automaton.control_state(from, theta),
                            symbol: pop,
                            bit: model.flag(from) || t.bit,
                            dst: t.dst,
                        };
                        self.push(new, Derivation::Swap { rule, via: id });
                    }
                }
            }
            if let Some(rules) = self.push_into.get(&(p1, t.symbol)) {
                let rules = rules.clone();
                for (rule, from, pop, g2) in rules {
                    if !set.contains(rule) {
                        continue;
                    }
                    let mid = Mid {
                        src: self.automaton.control_state(from, theta),
                        symbol: pop,
                        bit: model.flag(from) || t.bit,
                        rule,
                        first: id,
                    };
                    let seconds = self.automaton.out(t.dst, g2).to_vec();
                    for second in seconds {
                        self.fire(&mid, second);
                    }
                    self.mids.entry((t.dst, g2)).or_default().push(mid);
                }
            }
            let pre = self.pre_edges[theta.index()].clone();
            for (rule, before) in pre {
                let m = model.rule(rule);
                if m.to() != p1 {
                    continue;
                }
                let from = m.from();
                let new = Transition {
                    src: self.automaton.control_state(from, before),
                    symbol: t.symbol,
                    bit: model.flag(from) || t.bit,
                    dst: t.dst,
                };
                self.push(new, Derivation::Modify { rule, via: id });
            }
        }
        if let Some(waiting) = self.mids.get(&(t.src, t.symbol)) {
            let waiting = waiting.clone();
            for mid in &waiting {
                self.fire(mid, id);
            }
        }
    }

    fn fire(&mut self, mid: &Mid, second: TransId) {
        let s = self.automaton.transition(second);
        let new = Transition {
            src: mid.src,
            symbol: mid.symbol,
            bit: mid.bit || s.bit,
            dst: s.dst,
        };
        self.push(
            new,
            Derivation::Push {
                rule: mid.rule,
                first: mid.first,
                second,
            },
        );
    }
}

/// Saturates `a` under the rules of `model`; `a` must use the phase table
/// of `phases`.
pub fn saturate(model: &SmBpds, phases: &ReachablePhases, a: LabeledAutomaton) -> LabeledAutomaton {
    let mut engine = Saturation::new(model, phases, a);
    engine.run();
    engine.into_automaton()
}

fn empty_seed(model: &SmBpds, phases: &ReachablePhases) -> LabeledAutomaton {
    let mut a = LabeledAutomaton::new(model.num_controls(), phases.table.clone());
    for p in model.controls() {
        for theta in phases.table.ids() {
            let s = a.control_state(p, theta);
            a.set_initial(s);
            a.set_final(s);
        }
    }
    a
}

/// Saturation engine for the pop table, left open so further seeds can be
/// added later.
pub fn pre_star_engine<'m>(model: &'m SmBpds, phases: &ReachablePhases) -> Saturation<'m> {
    let mut engine = Saturation::new(model, phases, empty_seed(model, phases));
    engine.run();
    engine
}

/// The pop table: ((p,θ), γ, b, (p″,θ″)) is present iff (⟨p,γ⟩,θ) reaches
/// (⟨p″,ε⟩,θ″), and present with b = 1 iff some such run visits G before
/// its last step.
pub fn pre_star_empty(model: &SmBpds, phases: &ReachablePhases) -> LabeledAutomaton {
    pre_star_engine(model, phases).into_automaton()
}

/// Adds a final state `f` with self-loops on every symbol (bottom included)
/// and a 0-labelled transition ((p,θ), γ, 0, f) per head. Returns `f`.
pub fn add_rep_seed(
    model: &SmBpds,
    engine: &mut Saturation<'_>,
    reps: &BTreeSet<Head>,
) -> AState {
    let f = engine.automaton_mut().add_aux("f");
    let a = engine.automaton_mut();
    a.clear_finals();
    a.set_final(f);
    for symbol in std::iter::once(BOTTOM).chain(model.symbols()) {
        engine.push(
            Transition {
                src: f,
                symbol,
                bit: false,
                dst: f,
            },
            Derivation::Seed,
        );
    }
    for h in reps {
        let src = engine.automaton().control_state(h.control, h.phase);
        engine.automaton_mut().set_initial(src);
        engine.push(
            Transition {
                src,
                symbol: h.top,
                bit: false,
                dst: f,
            },
            Derivation::Seed,
        );
    }
    f
}

/// Automaton accepting exactly { (⟨p,γv⟩,θ) : ((p,γ),θ) ∈ reps }.
pub fn seed_rep_automaton(
    model: &SmBpds,
    phases: &ReachablePhases,
    reps: &BTreeSet<Head>,
) -> LabeledAutomaton {
    let mut a = LabeledAutomaton::new(model.num_controls(), phases.table.clone());
    let f = a.add_aux("f");
    a.set_final(f);
    for symbol in std::iter::once(BOTTOM).chain(model.symbols()) {
        a.add(
            Transition {
                src: f,
                symbol,
                bit: false,
                dst: f,
            },
            Derivation::Seed,
        );
    }
    for h in reps {
        let src = a.control_state(h.control, h.phase);
        a.set_initial(src);
        a.add(
            Transition {
                src,
                symbol: h.top,
                bit: false,
                dst: f,
            },
            Derivation::Seed,
        );
    }
    a
}

/// For a transition into the auxiliary seed state, the seed transition its
/// derivation ends in.
pub fn seed_origin(a: &LabeledAutomaton, mut t: TransId) -> TransId {
    loop {
        match a.derivation(t) {
            Derivation::Seed | Derivation::Pop { .. } => return t,
            Derivation::Swap { via, .. } | Derivation::Modify { via, .. } => t = via,
            Derivation::Push { first, second, .. } => {
                let f = a.transition(t).dst;
                t = if a.transition(first).dst == f { first } else { second };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reachable_phases, SmPds, SmPdsBuilder};

    fn push_pop(g: bool) -> SmBpds {
        let mut b = SmPdsBuilder::new();
        let p0 = b.control("p0");
        let p1 = b.control("p1");
        let a = b.symbol("a").unwrap();
        b.normal("r1", p0, a, p1, vec![a, a]).unwrap();
        b.normal("r2", p1, a, p0, vec![]).unwrap();
        let m = b.build().unwrap();
        let acc = if g { vec![p0] } else { vec![] };
        m.with_accepting(acc)
    }

    fn guarded_loop() -> SmPds {
        let mut b = SmPdsBuilder::new();
        let p0 = b.control("p0");
        let p1 = b.control("p1");
        let p2 = b.control("p2");
        let a = b.symbol("a").unwrap();
        b.symbol("b").unwrap();
        b.normal("r1", p0, a, p1, vec![a]).unwrap();
        let r2 = b.normal("r2", p1, a, p0, vec![a]).unwrap();
        let r3 = b.normal("r3", p1, a, p2, vec![]).unwrap();
        b.modifying("c1", p0, vec![r2], vec![r3], p1).unwrap();
        b.build().unwrap()
    }

    fn facts(m: &SmBpds, a: &LabeledAutomaton) -> BTreeSet<(String, String, bool, String)> {
        a.transitions()
            .iter()
            .map(|t| {
                (
                    a.state_name(t.src, m),
                    m.symbol_name(t.symbol).to_string(),
                    t.bit,
                    a.state_name(t.dst, m),
                )
            })
            .collect()
    }

    fn fact(s: &str, g: &str, b: bool, d: &str) -> (String, String, bool, String) {
        (s.into(), g.into(), b, d.into())
    }

    #[test]
    fn push_pop_pop_table() {
        let m = push_pop(true);
        let phases = reachable_phases(&m, &m.all_rules());
        let a = pre_star_empty(&m, &phases);
        // ⟨p0,a⟩ never empties its stack: r1 grows it, r2 shrinks it back.
        assert_eq!(facts(&m, &a), BTreeSet::from([fact("(p1,θ0)", "a", false, "(p0,θ0)")]));
    }

    #[test]
    fn guarded_loop_pop_table() {
        let m = guarded_loop().with_accepting([]);
        let theta0 = m.rule_set(["r1", "r2", "c1"]).unwrap();
        let phases = reachable_phases(&m, &theta0);
        let a = pre_star_empty(&m, &phases);
        let expected = BTreeSet::from([
            fact("(p1,θ1)", "a", false, "(p2,θ1)"),
            fact("(p0,θ1)", "a", false, "(p2,θ1)"),
            fact("(p0,θ0)", "a", false, "(p2,θ1)"),
            fact("(p1,θ0)", "a", false, "(p2,θ1)"),
        ]);
        assert_eq!(facts(&m, &a), expected);
    }

    #[test]
    fn rule_free_model_leaves_automaton_unchanged() {
        let mut b = SmPdsBuilder::new();
        b.control("p");
        b.symbol("a").unwrap();
        let m = b.build().unwrap().with_accepting([]);
        let phases = reachable_phases(&m, &m.all_rules());
        let mut seed = LabeledAutomaton::new(1, phases.table.clone());
        let s = seed.control_state(ControlId(0), PhaseId(0));
        let f = seed.add_aux("f");
        seed.add(Transition { src: s, symbol: SymbolId(1), bit: true, dst: f }, Derivation::Seed);
        let out = saturate(&m, &phases, seed.clone());
        assert_eq!(out.transitions(), seed.transitions());
    }

    #[test]
    fn no_pop_rules_means_empty_table() {
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let a = b.symbol("a").unwrap();
        b.normal("r", p, a, p, vec![a, a]).unwrap();
        let m = b.build().unwrap().with_accepting([p]);
        let phases = reachable_phases(&m, &m.all_rules());
        assert!(pre_star_empty(&m, &phases).is_empty());
    }

    #[test]
    fn accepts_reports_bit_sets() {
        let m = push_pop(false);
        let phases = reachable_phases(&m, &m.all_rules());
        let mut a = LabeledAutomaton::new(2, phases.table.clone());
        let s = a.control_state(ControlId(0), PhaseId(0));
        let f = a.add_aux("f");
        a.set_initial(s);
        a.set_final(f);
        let sym = SymbolId(1);
        assert!(a.accepts_word(s, &[sym]).is_empty());
        a.add(Transition { src: s, symbol: sym, bit: true, dst: f }, Derivation::Seed);
        assert_eq!(a.accepts_word(s, &[sym]), BTreeSet::from([true]));
        a.add(Transition { src: s, symbol: sym, bit: false, dst: f }, Derivation::Seed);
        assert_eq!(a.accepts_word(s, &[sym]), BTreeSet::from([false, true]));
    }

    #[test]
    fn rep_seed_accepts_stacks_with_bottom() {
        let m = push_pop(true);
        let phases = reachable_phases(&m, &m.all_rules());
        let head = Head {
            control: ControlId(0),
            top: SymbolId(1),
            phase: PhaseId(0),
        };
        let a = seed_rep_automaton(&m, &phases, &BTreeSet::from([head]));
        let theta = m.all_rules();
        assert!(!a.accepts(&m.configuration("p0", &["a"], theta.clone()).unwrap()).is_empty());
        assert!(!a.accepts(&m.configuration("p0", &["a", "a"], theta.clone()).unwrap()).is_empty());
        assert!(a.accepts(&m.configuration("p1", &["a"], theta).unwrap()).is_empty());
        let none = seed_rep_automaton(&m, &phases, &BTreeSet::new());
        assert!(none.accepts(&m.configuration("p0", &["a"], m.all_rules()).unwrap()).is_empty());
    }

    #[test]
    fn replay_follows_derivations() {
        let m = guarded_loop().with_accepting([]);
        let theta0 = m.rule_set(["r1", "r2", "c1"]).unwrap();
        let phases = reachable_phases(&m, &theta0);
        let a = pre_star_empty(&m, &phases);
        for id in 0..a.len() as TransId {
            let rules = a.replay(id, 100).unwrap();
            let t = a.transition(id);
            let StateKind::Control(p, theta) = a.kind(t.src) else { panic!() };
            let mut c = Configuration::new(p, vec![t.symbol], phases.table.get(theta).clone());
            for r in rules {
                c = crate::model::apply_rule(&m, &c, r).expect("replay step applies");
            }
            let StateKind::Control(q, phi) = a.kind(t.dst) else { panic!() };
            assert_eq!(c, Configuration::new(q, vec![], phases.table.get(phi).clone()));
        }
    }
}
