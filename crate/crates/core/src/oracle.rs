//! Independent oracles: the phase-encoding translation to an ordinary
//! pushdown system, and a bounded explicit-state explorer.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::time::Instant;

use crate::error::Error;
use crate::headgraph::{model_check_ba, Answer, EdgeCause, HeadGraph};
use crate::ltl::{ltl_to_buchi, to_nnf, Formula};
use crate::model::{
    apply_rule, normalize, reachable_phases, successor_steps, Configuration, ControlId, Head,
    ReachablePhases, RuleId, RuleKind, SmBpds, SmPds, SmPdsBuilder, SymbolId,
};
use crate::phase::{PhaseId, PhaseTable, RuleSet};
use crate::prestar::{AState, LabeledAutomaton, StateKind, TransId, Transition};

/// An SM-BPDS with the phase folded into the control points.
#[derive(Clone, Debug)]
pub struct Translation {
    pub system: SmBpds,
    pub phases: ReachablePhases,
}

impl Translation {
    /// The control (p, θ).
    pub fn control(&self, p: ControlId, theta: PhaseId) -> ControlId {
        ControlId((p.index() * self.phases.len() + theta.index()) as u32)
    }

    /// Maps a source configuration; `None` if its phase is not reachable.
    pub fn config(&self, c: &Configuration) -> Option<Configuration> {
        let theta = self.phases.table.lookup(&c.phase)?;
        Some(Configuration {
            control: self.control(c.control, theta),
            stack: c.stack.clone(),
            phase: self.system.all_rules(),
        })
    }
}

/// Eliminates modifying rules by pairing controls with the phases
/// reachable from θ0. A modifying rule becomes one swap rule per stack
/// symbol. The result has a single phase: all of its rules.
pub fn translate_to_pds(model: &SmBpds, theta0: &RuleSet) -> Result<Translation, Error> {
    let phases = reachable_phases(model, theta0);
    let nph = phases.len();
    let ctrl = |p: ControlId, theta: PhaseId| ControlId((p.index() * nph + theta.index()) as u32);
    let mut b = SmPdsBuilder::new();
    for atom in model.atoms() {
        b.atom(atom);
    }
    let mut accepting = Vec::new();
    for p in model.controls() {
        for theta in phases.table.ids() {
            let c = b.control(&format!("{}#{}", model.control_name(p), theta.0));
            for atom in model.label(p) {
                b.label(c, atom);
            }
            if model.is_accepting(p) {
                accepting.push(c);
            }
        }
    }
    let symbols: Vec<_> = model.symbols().collect();
    for &s in &symbols {
        b.symbol(model.symbol_name(s))?;
    }
    for (theta, set) in phases.table.iter() {
        for rule in set.iter().filter(|r| r.index() < model.num_rules()) {
            if let RuleKind::Normal(r) = &model.rule(rule).kind {
                b.normal(
                    &format!("{}#{}", model.rule_name(rule), theta.0),
                    ctrl(r.from, theta),
                    r.pop,
                    ctrl(r.to, theta),
                    r.push.clone(),
                )?;
            }
        }
    }
    for &(theta, rule, next) in &phases.edges {
        let r = model.rule(rule);
        for &s in &symbols {
            b.normal(
                &format!("{}#{}#{}", model.rule_name(rule), theta.0, model.symbol_name(s)),
                ctrl(r.from(), theta),
                s,
                ctrl(r.to(), next),
                vec![s],
            )?;
        }
    }
    let system = b.build()?.with_accepting(accepting);
    Ok(Translation { system, phases })
}

/// Facts about ⇒ found by breadth-first search from one configuration.
#[derive(Clone, Debug)]
pub struct ExploreFacts {
    pub start: Configuration,
    /// Pairs (start, c) with start ⇒* c.
    pub reach: BTreeSet<(Configuration, Configuration)>,
    /// Pairs (start, c) reached through a G-configuration followed by at
    /// least one step.
    pub r_flag: BTreeSet<(Configuration, Configuration)>,
    /// Some successor was pruned by the depth or stack bound.
    pub frontier_truncated: bool,
    parents: HashMap<(Configuration, bool), (Configuration, bool, RuleId)>,
}

impl ExploreFacts {
    pub fn reaches(&self, c: &Configuration) -> bool {
        self.reach.contains(&(self.start.clone(), c.clone()))
    }

    pub fn reaches_through_g(&self, c: &Configuration) -> bool {
        self.r_flag.contains(&(self.start.clone(), c.clone()))
    }

    /// Configurations reached from the start.
    pub fn targets(&self) -> impl Iterator<Item = &Configuration> {
        self.reach.iter().map(|(_, c)| c)
    }

    /// Rules leading from the start to `c`, through G when `through_g`.
    pub fn witness(&self, c: &Configuration, through_g: bool) -> Option<Vec<RuleId>> {
        let mut key = (c.clone(), through_g);
        if key.0 == self.start && !through_g {
            return Some(Vec::new());
        }
        self.parents.get(&key)?;
        let mut rules = Vec::new();
        while let Some((prev, flag, rule)) = self.parents.get(&key) {
            rules.push(*rule);
            key = (prev.clone(), *flag);
            if key.0 == self.start && !key.1 {
                break;
            }
        }
        rules.reverse();
        Some(rules)
    }
}

/// Explores ⇒ from `c0` for at most `max_depth` steps, dropping
/// configurations whose stack is higher than `max_stack`.
pub fn bounded_explore(
    model: &SmBpds,
    c0: &Configuration,
    max_depth: usize,
    max_stack: usize,
) -> ExploreFacts {
    let mut facts = ExploreFacts {
        start: c0.clone(),
        reach: BTreeSet::from([(c0.clone(), c0.clone())]),
        r_flag: BTreeSet::new(),
        frontier_truncated: false,
        parents: HashMap::new(),
    };
    let mut seen: BTreeSet<(Configuration, bool)> = BTreeSet::from([(c0.clone(), false)]);
    let mut queue = VecDeque::from([(c0.clone(), false, 0usize)]);
    while let Some((c, flag, depth)) = queue.pop_front() {
        let steps = successor_steps(model, &c);
        if depth == max_depth {
            facts.frontier_truncated |= !steps.is_empty();
            continue;
        }
        let next_flag = flag || model.is_accepting(c.control);
        for (rule, next) in steps {
            if next.height() > max_stack {
                facts.frontier_truncated = true;
                continue;
            }
            let key = (next.clone(), next_flag);
            if seen.contains(&key) {
                continue;
            }
            seen.insert(key.clone());
            facts.parents.insert(key, (c.clone(), flag, rule));
            facts.reach.insert((c0.clone(), next.clone()));
            if next_flag {
                facts.r_flag.insert((c0.clone(), next.clone()));
            }
            queue.push_back((next, next_flag, depth + 1));
        }
    }
    facts
}

/// Applies `rules` from `c`, reporting the final configuration and whether
/// a G-configuration was left by some step.
pub fn replay_rules(model: &SmBpds, c: &Configuration, rules: &[RuleId]) -> Option<(Configuration, bool)> {
    let mut cur = c.clone();
    let mut visited_g = false;
    for &r in rules {
        visited_g |= model.is_accepting(cur.control);
        cur = apply_rule(model, &cur, r)?;
    }
    Some((cur, visited_g))
}

/// Rule sequence realizing a walk of head-graph edges, starting from the
/// first edge's head. `None` if a pop-table replay is too long.
pub fn replay_head_walk(
    graph: &HeadGraph,
    pop: &LabeledAutomaton,
    walk: &[usize],
    limit: usize,
) -> Option<Vec<RuleId>> {
    let mut rules = Vec::new();
    for &e in walk {
        let edge = graph.edges()[e];
        rules.push(edge.cause.rule());
        if let EdgeCause::PushPop { via, .. } = edge.cause {
            rules.extend(pop.replay(via, limit)?);
        }
        if rules.len() > limit {
            return None;
        }
    }
    Some(rules)
}

/// Result of searching for a lasso within bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoSearch {
    /// A head h, reachable from the start, such that (⟨p,γ⟩,θ) reaches a
    /// configuration with head h again through G.
    pub found: Option<Head>,
    pub truncated: bool,
}

/// Whether `head` recurs from its own minimal configuration through a
/// G-visit. A hit is a genuine accepting lasso: the run never looks below
/// γ, so it can be repeated forever. Returns (hit, truncated).
pub fn head_recurs(
    model: &SmBpds,
    phases: &PhaseTable,
    head: &Head,
    max_depth: usize,
    max_stack: usize,
) -> (bool, bool) {
    let start = Configuration::new(head.control, vec![head.top], phases.get(head.phase).clone());
    let facts = bounded_explore(model, &start, max_depth, max_stack);
    let hit = facts.r_flag.iter().any(|(_, c)| {
        c.control == head.control && c.top() == Some(head.top) && c.phase == start.phase
    });
    (hit, facts.frontier_truncated)
}

/// Looks for an accepting lasso from `c0`: a reachable head that recurs
/// through G, both searches bounded by `max_depth` and `max_stack`.
pub fn bounded_lasso(model: &SmBpds, c0: &Configuration, max_depth: usize, max_stack: usize) -> LassoSearch {
    let facts = bounded_explore(model, c0, max_depth, max_stack);
    let mut truncated = facts.frontier_truncated;
    let mut phases = PhaseTable::new();
    let heads: BTreeSet<(ControlId, SymbolId, RuleSet)> = facts
        .targets()
        .filter_map(|c| c.top().map(|g| (c.control, g, c.phase.clone())))
        .collect();
    for (control, top, phase) in heads {
        let head = Head { control, top, phase: phases.intern(&phase) };
        let (hit, cut) = head_recurs(model, &phases, &head, max_depth, max_stack);
        truncated |= cut;
        if hit {
            return LassoSearch { found: Some(head), truncated };
        }
    }
    LassoSearch { found: None, truncated }
}

/// Outcome of running both pipelines on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossReport {
    pub direct: Answer,
    pub translated: Answer,
    /// Number of transitions of the Büchi automaton.
    pub ba_transitions: usize,
    /// normalize + automaton + product + emptiness, on the SM-PDS.
    pub direct_ms: f64,
    /// normalize + phase encoding.
    pub translate_ms: f64,
    /// automaton + product + emptiness, on the encoded PDS.
    pub check_ms: f64,
}

impl CrossReport {
    pub fn agree(&self) -> bool {
        self.direct == self.translated
    }
}

/// Checks φ on `model` directly and through the phase encoding.
pub fn cross_check(
    model: &SmPds,
    theta0: &RuleSet,
    c0: &Configuration,
    phi: &Formula,
) -> Result<CrossReport, Error> {
    let t = Instant::now();
    let ba = ltl_to_buchi(&to_nnf(phi));
    let direct = model_check_ba(model, theta0, c0, &ba)?.verdict().answer;
    let direct_ms = t.elapsed().as_secs_f64() * 1000.0;

    let t = Instant::now();
    let normal = normalize(model)?;
    let theta = normal.lift_phase(theta0);
    let translation = translate_to_pds(&normal.with_accepting([]), &theta)?;
    let start = Configuration {
        control: c0.control,
        stack: c0.stack.clone(),
        phase: theta,
    };
    let pds_c0 = translation.config(&start).expect("initial phase is reachable");
    let pds = translation.system.into_system();
    let translate_ms = t.elapsed().as_secs_f64() * 1000.0;

    let t = Instant::now();
    let ba = ltl_to_buchi(&to_nnf(phi));
    let all = pds.all_rules();
    let translated = model_check_ba(&pds, &all, &pds_c0, &ba)?.verdict().answer;
    let check_ms = t.elapsed().as_secs_f64() * 1000.0;
    Ok(CrossReport {
        direct,
        translated,
        ba_transitions: ba.transitions.len(),
        direct_ms,
        translate_ms,
        check_ms,
    })
}

/// Pop-table entries and bounded-search facts that failed to match.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PopAudit {
    pub transitions: usize,
    /// Table entries whose run was found by the bounded search.
    pub confirmed: usize,
    /// Table entries the bounded search missed while it was cut short;
    /// their derivation still replays to the claimed configuration.
    pub beyond_bounds: usize,
    /// Table entries with no matching run.
    pub unsound: Vec<Transition>,
    /// Facts (start, end, bit) found by the search but absent from the table.
    pub missing: Vec<(Configuration, Configuration, bool)>,
}

impl PopAudit {
    pub fn clean(&self) -> bool {
        self.unsound.is_empty() && self.missing.is_empty()
    }
}

/// Compares a pop table against bounded exploration from every
/// (⟨p,γ⟩,θ) over the phases of `phases`.
pub fn audit_pop_table(
    model: &SmBpds,
    phases: &ReachablePhases,
    pop: &LabeledAutomaton,
    max_depth: usize,
    max_stack: usize,
) -> PopAudit {
    let mut audit = PopAudit { transitions: pop.len(), ..PopAudit::default() };
    let mut by_start: HashMap<(AState, SymbolId), Vec<TransId>> = HashMap::new();
    for (id, t) in pop.transitions().iter().enumerate() {
        by_start.entry((t.src, t.symbol)).or_default().push(id as TransId);
    }
    for (theta, set) in phases.table.iter() {
        for p in model.controls() {
            for g in model.symbols() {
                let start = Configuration::new(p, vec![g], set.clone());
                let facts = bounded_explore(model, &start, max_depth, max_stack);
                let src = pop.control_state(p, theta);
                let ends: Vec<&Configuration> = facts.targets().filter(|c| c.is_empty_stack()).collect();
                for end in ends {
                    let Some(end_phase) = phases.table.lookup(&end.phase) else {
                        audit.missing.push((start.clone(), end.clone(), false));
                        continue;
                    };
                    let dst = pop.control_state(end.control, end_phase);
                    for bit in [false, true] {
                        let seen = if bit { facts.reaches_through_g(end) } else { facts.witness(end, false).is_some() };
                        if seen && !pop.contains(&Transition { src, symbol: g, bit, dst }) {
                            audit.missing.push((start.clone(), end.clone(), bit));
                        }
                    }
                }
                for &id in by_start.get(&(src, g)).map(Vec::as_slice).unwrap_or(&[]) {
                    let t = pop.transition(id);
                    let StateKind::Control(q, q_theta) = pop.kind(t.dst) else {
                        audit.unsound.push(t);
                        continue;
                    };
                    let end = Configuration::new(q, Vec::new(), phases.table.get(q_theta).clone());
                    let found = if t.bit { facts.reaches_through_g(&end) } else { facts.witness(&end, false).is_some() };
                    if found {
                        audit.confirmed += 1;
                        continue;
                    }
                    let replays = pop
                        .replay(id, 100_000)
                        .and_then(|rules| replay_rules(model, &start, &rules))
                        .is_some_and(|(c, g_seen)| c == end && g_seen == t.bit);
                    if facts.frontier_truncated && replays {
                        audit.beyond_bounds += 1;
                    } else {
                        audit.unsound.push(t);
                    }
                }
            }
        }
    }
    audit
}

/// Repeating heads by brute force: transitive closure of the graph,
/// tracking whether some path uses a 1-labelled edge.
pub fn brute_repeating_heads(g: &HeadGraph) -> BTreeSet<Head> {
    let n = g.nodes().len();
    let mut any = vec![vec![false; n]; n];
    let mut one = vec![vec![false; n]; n];
    for e in g.edges() {
        any[e.src][e.dst] = true;
        one[e.src][e.dst] |= e.bit;
    }
    for k in 0..n {
        for i in 0..n {
            if !any[i][k] {
                continue;
            }
            for j in 0..n {
                if any[k][j] {
                    any[i][j] = true;
                    one[i][j] |= one[i][k] || one[k][k] || one[k][j];
                }
            }
        }
    }
    (0..n).filter(|&i| one[i][i]).map(|i| g.nodes()[i]).collect()
}
