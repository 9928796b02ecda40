//! Head reachability graph, repeating heads, and the emptiness check for
//! self-modifying Büchi pushdown systems.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::time::Instant;

use crate::error::Error;
use crate::graph::strongly_connected;
use crate::ltl::{ltl_to_buchi, to_nnf, BuchiAutomaton, Formula};
use crate::model::{normalize, reachable_phases, Configuration, Head, ReachablePhases, RuleId, SmBpds, SmPds};
use crate::phase::RuleSet;
use crate::prestar::{
    add_rep_seed, escape, phase_legend, pre_star_engine, seed_origin, LabeledAutomaton, StateKind,
    TransId,
};
use crate::product::{build_product, initial_product_config, Product};

/// Why an edge of the head graph exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeCause {
    /// Modifying rule; the top symbol is unchanged.
    Modify { rule: RuleId },
    /// Swap rule ⟨p,γ⟩↪⟨p0,γ0⟩.
    Swap { rule: RuleId },
    /// Push rule ⟨p,γ⟩↪⟨p0,γ0γ′⟩, moving to the new top γ0.
    PushHead { rule: RuleId },
    /// Push rule followed by the pop-table transition `via` that consumes
    /// γ0, exposing γ′.
    PushPop { rule: RuleId, via: TransId },
}

impl EdgeCause {
    pub fn rule(&self) -> RuleId {
        match *self {
            EdgeCause::Modify { rule }
            | EdgeCause::Swap { rule }
            | EdgeCause::PushHead { rule }
            | EdgeCause::PushPop { rule, .. } => rule,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeadEdge {
    pub src: usize,
    pub bit: bool,
    pub dst: usize,
    pub cause: EdgeCause,
}

/// Graph over heads ((p,γ),θ) with 0/1-labelled edges. Nodes are created
/// only for heads with an incident edge.
#[derive(Clone, Debug, Default)]
pub struct HeadGraph {
    nodes: Vec<Head>,
    index: HashMap<Head, usize>,
    edges: Vec<HeadEdge>,
    edge_index: HashMap<(usize, bool, usize), usize>,
}

impl HeadGraph {
    pub fn node(&mut self, h: Head) -> usize {
        if let Some(&i) = self.index.get(&h) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(h);
        self.index.insert(h, i);
        i
    }

    /// Adds an edge; the first justification of a given (src, bit, dst)
    /// is kept.
    pub fn add_edge(&mut self, src: Head, bit: bool, dst: Head, cause: EdgeCause) {
        let (s, d) = (self.node(src), self.node(dst));
        if self.edge_index.contains_key(&(s, bit, d)) {
            return;
        }
        self.edge_index.insert((s, bit, d), self.edges.len());
        self.edges.push(HeadEdge {
            src: s,
            bit,
            dst: d,
            cause,
        });
    }

    pub fn nodes(&self) -> &[Head] {
        &self.nodes
    }

    pub fn edges(&self) -> &[HeadEdge] {
        &self.edges
    }

    pub fn node_id(&self, h: &Head) -> Option<usize> {
        self.index.get(h).copied()
    }

    pub fn has_edge(&self, src: &Head, bit: bool, dst: &Head) -> bool {
        match (self.node_id(src), self.node_id(dst)) {
            (Some(s), Some(d)) => self.edge_index.contains_key(&(s, bit, d)),
            _ => false,
        }
    }

    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.src, e.dst)).collect()
    }

    pub fn scc_count(&self) -> usize {
        strongly_connected(self.nodes.len(), &self.edge_pairs()).count
    }

    /// A closed walk from `h` back to itself that uses a 1-labelled edge,
    /// as edge indices. `None` when `h` is not repeating.
    pub fn repeating_cycle(&self, h: &Head) -> Option<Vec<usize>> {
        let start = self.node_id(h)?;
        let comps = strongly_connected(self.nodes.len(), &self.edge_pairs());
        let c = comps.id[start];
        let inside = |e: &HeadEdge| comps.id[e.src] == c && comps.id[e.dst] == c;
        let (one, edge) = self
            .edges
            .iter()
            .enumerate()
            .find(|(_, e)| e.bit && inside(e))?;
        let mut walk = self.path_within(start, edge.src, &inside)?;
        walk.push(one);
        walk.extend(self.path_within(edge.dst, start, &inside)?);
        Some(walk)
    }

    fn path_within(
        &self,
        from: usize,
        to: usize,
        allowed: &dyn Fn(&HeadEdge) -> bool,
    ) -> Option<Vec<usize>> {
        let mut back: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != from {
                    let e = back[&cur];
                    path.push(e);
                    cur = self.edges[e].src;
                }
                path.reverse();
                return Some(path);
            }
            for (i, e) in self.edges.iter().enumerate() {
                if e.src == v && allowed(e) && seen.insert(e.dst) {
                    back.insert(e.dst, i);
                    queue.push_back(e.dst);
                }
            }
        }
        None
    }

    pub fn format_head(&self, h: &Head, model: &SmBpds) -> String {
        format!(
            "{}/{}/θ{}",
            model.control_name(h.control),
            model.symbol_name(h.top),
            h.phase.0
        )
    }

    /// DOT rendering: bit-1 edges solid, bit-0 edges dashed, nodes in
    /// insertion order and a phase legend.
    pub fn to_dot(&self, model: &SmBpds, phases: &ReachablePhases) -> String {
        let mut out = String::from("digraph heads {\n");
        for (i, h) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", escape(&self.format_head(h, model)));
        }
        for e in &self.edges {
            let style = if e.bit { "solid" } else { "dashed" };
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\", style={}];",
                e.src,
                e.dst,
                u8::from(e.bit),
                style
            );
        }
        out.push_str(&phase_legend(&phases.table, model));
        out.push_str("}\n");
        out
    }
}

/// Builds the head graph from the pop table `pop` (over the phase table of
/// `phases`).
pub fn build_head_graph(model: &SmBpds, phases: &ReachablePhases, pop: &LabeledAutomaton) -> HeadGraph {
    let mut g = HeadGraph::default();
    let symbols: Vec<_> = model.symbols().collect();
    for &(theta, rule, next) in &phases.edges {
        let r = model.rule(rule);
        let bit = model.flag(r.from());
        for &gamma in &symbols {
            g.add_edge(
                Head { control: r.from(), top: gamma, phase: theta },
                bit,
                Head { control: r.to(), top: gamma, phase: next },
                EdgeCause::Modify { rule },
            );
        }
    }
    for (theta, set) in phases.table.iter() {
        for rule in set.iter() {
            if rule.index() >= model.num_rules() {
                continue;
            }
            let Some(r) = model.rule(rule).as_normal() else {
                continue;
            };
            let bit = model.flag(r.from);
            let src = Head { control: r.from, top: r.pop, phase: theta };
            match r.push[..] {
                [g0] => g.add_edge(
                    src,
                    bit,
                    Head { control: r.to, top: g0, phase: theta },
                    EdgeCause::Swap { rule },
                ),
                [g0, g1] => {
                    g.add_edge(
                        src,
                        bit,
                        Head { control: r.to, top: g0, phase: theta },
                        EdgeCause::PushHead { rule },
                    );
                    for &via in pop.out(pop.control_state(r.to, theta), g0) {
                        let t = pop.transition(via);
                        if let StateKind::Control(p, phase) = pop.kind(t.dst) {
                            g.add_edge(
                                src,
                                bit || t.bit,
                                Head { control: p, top: g1, phase },
                                EdgeCause::PushPop { rule, via },
                            );
                        }
                    }
                }
                _ => {}
            }
        }
    }
    g
}

/// Heads lying on a cycle through a 1-labelled edge: the members of every
/// SCC that contains an internal 1-edge.
pub fn repeating_heads(g: &HeadGraph) -> BTreeSet<Head> {
    let comps = strongly_connected(g.nodes.len(), &g.edge_pairs());
    let mut good = vec![false; comps.count];
    for e in &g.edges {
        if e.bit && comps.id[e.src] == comps.id[e.dst] {
            good[comps.id[e.src]] = true;
        }
    }
    g.nodes
        .iter()
        .enumerate()
        .filter(|(i, _)| good[comps.id[*i]])
        .map(|(_, h)| *h)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    AcceptingRun,
    NoAcceptingRun,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::AcceptingRun => "accepting-run-exists",
            Answer::NoAcceptingRun => "none",
        })
    }
}

/// Evidence for an accepting run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// The repeating head reached from the initial configuration.
    pub head: Head,
    /// Rules leading from the initial configuration to a configuration with
    /// that head, if short enough to materialize.
    pub prefix: Option<Vec<RuleId>>,
    /// Head-graph edges of a closed walk on `head` through a 1-edge.
    pub cycle: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Answer,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn accepting(&self) -> bool {
        self.answer == Answer::AcceptingRun
    }
}

/// Sizes and stage timings of one check.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stats {
    pub ba_states: usize,
    pub product_rules: usize,
    pub phases: usize,
    pub pop_transitions: usize,
    pub saturated_transitions: usize,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub sccs: usize,
    pub repeating_heads: usize,
    pub product_ms: f64,
    pub prestar_ms: f64,
    pub graph_ms: f64,
    pub emptiness_ms: f64,
}

impl Stats {
    /// `key=value` pairs separated by spaces; sizes first, then times.
    pub fn to_kv(&self) -> String {
        format!(
            "ba_states={} product_rules={} phases={} pop_transitions={} saturated_transitions={} graph_nodes={} graph_edges={} sccs={} repeating_heads={} product_ms={:.3} prestar_ms={:.3} graph_ms={:.3} emptiness_ms={:.3}",
            self.ba_states,
            self.product_rules,
            self.phases,
            self.pop_transitions,
            self.saturated_transitions,
            self.graph_nodes,
            self.graph_edges,
            self.sccs,
            self.repeating_heads,
            self.product_ms,
            self.prestar_ms,
            self.graph_ms,
            self.emptiness_ms,
        )
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// Everything computed by the emptiness check.
#[derive(Clone, Debug)]
pub struct Emptiness {
    pub phases: ReachablePhases,
    pub pop: LabeledAutomaton,
    pub graph: HeadGraph,
    pub reps: BTreeSet<Head>,
    pub verdict: Verdict,
    pub stats: Stats,
}

/// Longest rule sequence materialized for a witness prefix.
const PREFIX_LIMIT: usize = 10_000;

/// Decides whether `model` has an accepting run from `c0`.
pub fn check_emptiness(model: &SmBpds, c0: &Configuration) -> Emptiness {
    let mut stats = Stats::default();
    let t = Instant::now();
    let phases = reachable_phases(model, &c0.phase);
    let mut engine = pre_star_engine(model, &phases);
    let pop = engine.automaton().clone();
    stats.prestar_ms = ms(t);
    stats.phases = phases.len();
    stats.pop_transitions = pop.len();

    let t = Instant::now();
    let graph = build_head_graph(model, &phases, &pop);
    let reps = repeating_heads(&graph);
    stats.graph_ms = ms(t);
    stats.graph_nodes = graph.nodes().len();
    stats.graph_edges = graph.edges().len();
    stats.sccs = graph.scc_count();
    stats.repeating_heads = reps.len();

    let t = Instant::now();
    let mut verdict = Verdict {
        answer: Answer::NoAcceptingRun,
        witness: None,
    };
    if !reps.is_empty() && !c0.is_empty_stack() {
        let f = add_rep_seed(model, &mut engine, &reps);
        engine.run();
        let a = engine.automaton();
        let start = a.control_state(c0.control, phases.initial);
        if let Some(path) = a.accepting_path(start, &c0.stack) {
            let enter = path
                .iter()
                .position(|&t| a.transition(t).dst == f)
                .expect("accepting path enters the seed state");
            let seed = a.transition(seed_origin(a, path[enter]));
            let StateKind::Control(control, phase) = a.kind(seed.src) else {
                unreachable!("seed transitions leave (p, θ) states")
            };
            let head = Head { control, top: seed.symbol, phase };
            let mut prefix = Some(Vec::new());
            for &t in &path[..=enter] {
                prefix = match (prefix, a.replay(t, PREFIX_LIMIT)) {
                    (Some(mut p), Some(more)) if p.len() + more.len() <= PREFIX_LIMIT => {
                        p.extend(more);
                        Some(p)
                    }
                    _ => None,
                };
            }
            let cycle = graph.repeating_cycle(&head).unwrap_or_default();
            verdict = Verdict {
                answer: Answer::AcceptingRun,
                witness: Some(Witness { head, prefix, cycle }),
            };
        }
        stats.saturated_transitions = engine.automaton().len();
    }
    stats.emptiness_ms = ms(t);
    Emptiness {
        phases,
        pop,
        graph,
        reps,
        verdict,
        stats,
    }
}

/// Whether some run from `c0` visits accepting controls infinitely often.
pub fn has_accepting_run(model: &SmBpds, c0: &Configuration) -> Verdict {
    check_emptiness(model, c0).verdict
}

/// Result of checking a formula: the emptiness check on the product.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub ba: BuchiAutomaton,
    pub product: Product,
    pub initial: Configuration,
    pub emptiness: Emptiness,
}

impl CheckOutcome {
    pub fn verdict(&self) -> &Verdict {
        &self.emptiness.verdict
    }

    pub fn stats(&self) -> &Stats {
        &self.emptiness.stats
    }
}

/// Checks whether some run of `model` from `c0` (with phase θ0) is accepted
/// by `ba`. The model is normalized first.
pub fn model_check_ba(
    model: &SmPds,
    theta0: &RuleSet,
    c0: &Configuration,
    ba: &BuchiAutomaton,
) -> Result<CheckOutcome, Error> {
    let t = Instant::now();
    let normal = normalize(model)?;
    let theta = normal.lift_phase(theta0);
    let start = Configuration {
        control: c0.control,
        stack: c0.stack.clone(),
        phase: theta.clone(),
    };
    let product = build_product(&normal, ba, &theta)?;
    let initial = initial_product_config(&start, ba, &product);
    let product_ms = ms(t);
    let mut emptiness = check_emptiness(&product.system, &initial);
    emptiness.stats.product_ms = product_ms;
    emptiness.stats.ba_states = ba.num_states();
    emptiness.stats.product_rules = product.system.num_rules();
    Ok(CheckOutcome {
        ba: ba.clone(),
        product,
        initial,
        emptiness,
    })
}

/// Existential LTL check: is there a run from `c0` satisfying `phi`? To
/// ask whether all runs satisfy φ, check ¬φ and invert.
pub fn model_check(
    model: &SmPds,
    theta0: &RuleSet,
    c0: &Configuration,
    phi: &Formula,
) -> Result<CheckOutcome, Error> {
    let ba = ltl_to_buchi(&to_nnf(phi));
    model_check_ba(model, theta0, c0, &ba)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;
    use crate::model::{apply_rule, ControlId, SmPdsBuilder, SymbolId};
    use crate::phase::PhaseId;
    use crate::prestar::pre_star_empty;

    fn push_pop(g: bool) -> SmBpds {
        let mut b = SmPdsBuilder::new();
        let p0 = b.control("p0");
        let p1 = b.control("p1");
        let a = b.symbol("a").unwrap();
        b.normal("r1", p0, a, p1, vec![a, a]).unwrap();
        b.normal("r2", p1, a, p0, vec![]).unwrap();
        let acc = if g { vec![p0] } else { vec![] };
        b.build().unwrap().with_accepting(acc)
    }

    fn head(p: u32, g: u32, theta: u32) -> Head {
        Head { control: ControlId(p), top: SymbolId(g), phase: PhaseId(theta) }
    }

    fn graph_of(m: &SmBpds, theta: &RuleSet) -> (ReachablePhases, HeadGraph) {
        let phases = reachable_phases(m, theta);
        let pop = pre_star_empty(m, &phases);
        let g = build_head_graph(m, &phases, &pop);
        (phases, g)
    }

    #[test]
    fn push_pop_graph_has_repeating_self_loop() {
        let m = push_pop(true);
        let (_, g) = graph_of(&m, &m.all_rules());
        let (p0a, p1a) = (head(0, 1, 0), head(1, 1, 0));
        assert!(g.has_edge(&p0a, true, &p1a));
        assert!(g.has_edge(&p0a, true, &p0a));
        assert_eq!(repeating_heads(&g), BTreeSet::from([p0a]));
    }

    #[test]
    fn guarded_loop_graph_edges() {
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
        let m = b.build().unwrap().with_accepting([]);
        let theta0 = m.rule_set(["r1", "r2", "c1"]).unwrap();
        let (_, g) = graph_of(&m, &theta0);
        for gamma in [1, 2] {
            assert!(g.has_edge(&head(0, gamma, 0), false, &head(1, gamma, 1)));
        }
        assert!(g.has_edge(&head(0, 1, 0), false, &head(1, 1, 0)));
        assert!(g.edges().iter().all(|e| !e.bit));
        assert!(repeating_heads(&g).is_empty());
    }

    #[test]
    fn pop_only_model_has_no_edges() {
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let a = b.symbol("a").unwrap();
        b.normal("r", p, a, p, vec![]).unwrap();
        let m = b.build().unwrap().with_accepting([p]);
        let (_, g) = graph_of(&m, &m.all_rules());
        assert!(g.edges().is_empty());
    }

    #[test]
    fn cycles_need_a_one_edge() {
        let (h1, h2) = (head(0, 1, 0), head(1, 1, 0));
        let cause = EdgeCause::Swap { rule: RuleId(0) };
        let mut g = HeadGraph::default();
        g.add_edge(h1, false, h2, cause);
        g.add_edge(h2, false, h1, cause);
        assert!(repeating_heads(&g).is_empty());
        let mut g = HeadGraph::default();
        g.add_edge(h1, true, h2, cause);
        assert!(repeating_heads(&g).is_empty());
        g.add_edge(h2, false, h1, cause);
        assert_eq!(repeating_heads(&g), BTreeSet::from([h1, h2]));
        assert_eq!(g.repeating_cycle(&h2).unwrap().len(), 2);
    }

    #[test]
    fn push_pop_accepting_run_with_witness() {
        let m = push_pop(true);
        let c0 = m.configuration("p0", &["a"], m.all_rules()).unwrap();
        let verdict = has_accepting_run(&m, &c0);
        assert_eq!(verdict.answer, Answer::AcceptingRun);
        let w = verdict.witness.unwrap();
        assert_eq!(w.head, head(0, 1, 0));
        let mut c = c0.clone();
        for r in w.prefix.unwrap() {
            c = apply_rule(&m, &c, r).unwrap();
        }
        assert_eq!((c.control, c.top()), (w.head.control, Some(w.head.top)));
        assert!(!w.cycle.is_empty());

        let empty = m.configuration("p1", &[], m.all_rules()).unwrap();
        assert_eq!(has_accepting_run(&m, &empty).answer, Answer::NoAcceptingRun);
        let no_g = push_pop(false);
        assert_eq!(has_accepting_run(&no_g, &c0).answer, Answer::NoAcceptingRun);
    }

    #[test]
    fn ltl_true_on_infinite_run() {
        let m = push_pop(false).into_system();
        let c0 = m.configuration("p0", &["a"], m.all_rules()).unwrap();
        let phi = parse_ltl("true").unwrap();
        let out = model_check(&m, &m.all_rules(), &c0, &phi).unwrap();
        assert!(out.verdict().accepting());
        let phi = parse_ltl("false").unwrap();
        assert!(!model_check(&m, &m.all_rules(), &c0, &phi).unwrap().verdict().accepting());
    }

    #[test]
    fn dot_marks_one_edges_solid() {
        let m = push_pop(true);
        let (phases, g) = graph_of(&m, &m.all_rules());
        let dot = g.to_dot(&m, &phases);
        assert!(dot.contains("label=\"p0/a/θ0\""));
        let id = g.node_id(&head(0, 1, 0)).unwrap();
        assert!(dot.contains(&format!("n{id} -> n{id} [label=\"1\", style=solid]")));
        let empty = HeadGraph::default().to_dot(&m, &phases);
        assert!(!empty.contains("->"));
    }
}
