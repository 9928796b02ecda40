//! Self-modifying pushdown systems: rules, configurations and the one-step
//! transition relation.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::Deref;

use crate::error::ModelError;
use crate::phase::{PhaseId, PhaseTable, RuleSet};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// A control point of the system.
    ControlId
);
id_type!(
    /// A stack symbol. [`BOTTOM`] is reserved.
    SymbolId
);
id_type!(
    /// Identity of a rule; normal and modifying rules share one id space.
    RuleId
);

/// The reserved bottom-of-stack symbol. No rule pops or pushes it.
pub const BOTTOM: SymbolId = SymbolId(0);
pub const BOTTOM_NAME: &str = "⊥";

/// `⟨from, pop⟩ ↪ ⟨to, push⟩`. `push` is written top first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalRule {
    pub from: ControlId,
    pub pop: SymbolId,
    pub to: ControlId,
    pub push: Vec<SymbolId>,
}

/// `from -(remove, add)-> to`. Leaves the stack untouched and rewrites the
/// phase to `(θ \ remove) ∪ add`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModifyingRule {
    pub from: ControlId,
    pub remove: RuleSet,
    pub add: RuleSet,
    pub to: ControlId,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Normal(NormalRule),
    Modifying(ModifyingRule),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub kind: RuleKind,
    /// Introduced by [`normalize`]; hidden from reports.
    pub synthetic: bool,
}

impl Rule {
    pub fn from(&self) -> ControlId {
        match &self.kind {
            RuleKind::Normal(r) => r.from,
            RuleKind::Modifying(r) => r.from,
        }
    }

    pub fn to(&self) -> ControlId {
        match &self.kind {
            RuleKind::Normal(r) => r.to,
            RuleKind::Modifying(r) => r.to,
        }
    }

    pub fn as_normal(&self) -> Option<&NormalRule> {
        match &self.kind {
            RuleKind::Normal(r) => Some(r),
            RuleKind::Modifying(_) => None,
        }
    }

    pub fn as_modifying(&self) -> Option<&ModifyingRule> {
        match &self.kind {
            RuleKind::Modifying(r) => Some(r),
            RuleKind::Normal(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Named {
    pub name: String,
    pub synthetic: bool,
}

/// A self-modifying pushdown system together with its labelling ν.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmPds {
    controls: Vec<Named>,
    symbols: Vec<Named>,
    rules: Vec<Rule>,
    atoms: BTreeSet<String>,
    labels: Vec<BTreeSet<String>>,
    /// Synthetic rules that must be enabled in every phase.
    always_on: RuleSet,
    control_index: HashMap<String, ControlId>,
    symbol_index: HashMap<String, SymbolId>,
    rule_index: HashMap<String, RuleId>,
}

impl SmPds {
    pub fn controls(&self) -> impl ExactSizeIterator<Item = ControlId> {
        (0..self.controls.len() as u32).map(ControlId)
    }

    /// Stack symbols, excluding the reserved bottom symbol.
    pub fn symbols(&self) -> impl ExactSizeIterator<Item = SymbolId> {
        (1..self.symbols.len() as u32).map(SymbolId)
    }

    pub fn rule_ids(&self) -> impl ExactSizeIterator<Item = RuleId> {
        (0..self.rules.len() as u32).map(RuleId)
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    /// Number of symbols in Γ (bottom not counted).
    pub fn num_symbols(&self) -> usize {
        self.symbols.len() - 1
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.index()]
    }

    pub fn rules(&self) -> impl Iterator<Item = (RuleId, &Rule)> {
        self.rules
            .iter()
            .enumerate()
            .map(|(i, r)| (RuleId(i as u32), r))
    }

    pub fn normal_rules(&self) -> impl Iterator<Item = (RuleId, &NormalRule)> {
        self.rules().filter_map(|(id, r)| r.as_normal().map(|n| (id, n)))
    }

    pub fn modifying_rules(&self) -> impl Iterator<Item = (RuleId, &ModifyingRule)> {
        self.rules()
            .filter_map(|(id, r)| r.as_modifying().map(|m| (id, m)))
    }

    pub fn num_modifying(&self) -> usize {
        self.modifying_rules().count()
    }

    pub fn control_name(&self, id: ControlId) -> &str {
        &self.controls[id.index()].name
    }

    pub fn is_synthetic_control(&self, id: ControlId) -> bool {
        self.controls[id.index()].synthetic
    }

    pub fn symbol_name(&self, id: SymbolId) -> &str {
        &self.symbols[id.index()].name
    }

    pub fn rule_name(&self, id: RuleId) -> &str {
        &self.rules[id.index()].name
    }

    pub fn control_by_name(&self, name: &str) -> Option<ControlId> {
        self.control_index.get(name).copied()
    }

    pub fn symbol_by_name(&self, name: &str) -> Option<SymbolId> {
        if name == BOTTOM_NAME {
            return Some(BOTTOM);
        }
        self.symbol_index.get(name).copied()
    }

    pub fn rule_by_name(&self, name: &str) -> Option<RuleId> {
        self.rule_index.get(name).copied()
    }

    pub fn atoms(&self) -> &BTreeSet<String> {
        &self.atoms
    }

    /// ν(p).
    pub fn label(&self, id: ControlId) -> &BTreeSet<String> {
        &self.labels[id.index()]
    }

    pub fn always_on(&self) -> &RuleSet {
        &self.always_on
    }

    pub fn empty_rule_set(&self) -> RuleSet {
        RuleSet::empty(self.rules.len())
    }

    pub fn all_rules(&self) -> RuleSet {
        RuleSet::full(self.rules.len())
    }

    /// Adds the rules that normalization marked as always enabled.
    pub fn lift_phase(&self, phase: &RuleSet) -> RuleSet {
        let mut out = phase.clone();
        out.grow(self.rules.len());
        out.union_with(&self.always_on);
        out
    }

    /// Resolves rule names into a rule set.
    pub fn rule_set<'a, I: IntoIterator<Item = &'a str>>(
        &self,
        names: I,
    ) -> Result<RuleSet, ModelError> {
        let mut set = self.empty_rule_set();
        for name in names {
            let id = self
                .rule_by_name(name)
                .ok_or_else(|| ModelError::UnknownRule(name.to_string()))?;
            set.insert(id);
        }
        Ok(set)
    }

    /// Builds a configuration from names; the stack is given top first and
    /// the bottom symbol is appended.
    pub fn configuration(
        &self,
        control: &str,
        stack: &[&str],
        phase: RuleSet,
    ) -> Result<Configuration, ModelError> {
        let control = self
            .control_by_name(control)
            .ok_or_else(|| ModelError::UnknownControl(control.to_string()))?;
        let stack = stack
            .iter()
            .map(|s| {
                self.symbol_by_name(s)
                    .filter(|&id| id != BOTTOM)
                    .ok_or_else(|| ModelError::UnknownSymbol(s.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Configuration::new(control, stack, phase))
    }

    pub fn with_accepting(self, accepting: impl IntoIterator<Item = ControlId>) -> SmBpds {
        let mut flags = vec![false; self.num_controls()];
        for c in accepting {
            flags[c.index()] = true;
        }
        SmBpds {
            pds: self,
            accepting: flags,
        }
    }

    /// Reopens the model for extension; ids of existing items are kept.
    pub fn into_builder(self) -> SmPdsBuilder {
        SmPdsBuilder {
            controls: self.controls,
            symbols: self.symbols,
            rules: self.rules,
            atoms: self.atoms,
            labels: self.labels,
            always_on: self.always_on.iter().collect(),
            control_index: self.control_index,
            symbol_index: self.symbol_index,
            rule_index: self.rule_index,
        }
    }

    pub fn format_config(&self, c: &Configuration, phases: Option<&PhaseTable>) -> String {
        let stack: Vec<&str> = c.stack.iter().map(|&s| self.symbol_name(s)).collect();
        let phase = match phases.and_then(|t| t.lookup(&c.phase)) {
            Some(id) => format!("θ{}", id.0),
            None => format!(
                "{{{}}}",
                c.phase
                    .iter()
                    .map(|r| self.rule_name(r))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        };
        format!(
            "(<{}, {}>, {})",
            self.control_name(c.control),
            stack.join(""),
            phase
        )
    }
}

/// Incremental constructor for [`SmPds`].
#[derive(Clone, Debug)]
pub struct SmPdsBuilder {
    controls: Vec<Named>,
    symbols: Vec<Named>,
    rules: Vec<Rule>,
    atoms: BTreeSet<String>,
    labels: Vec<BTreeSet<String>>,
    always_on: Vec<RuleId>,
    control_index: HashMap<String, ControlId>,
    symbol_index: HashMap<String, SymbolId>,
    rule_index: HashMap<String, RuleId>,
}

impl Default for SmPdsBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl SmPdsBuilder {
    pub fn new() -> Self {
        SmPdsBuilder {
            controls: Vec::new(),
            symbols: vec![Named {
                name: BOTTOM_NAME.to_string(),
                synthetic: true,
            }],
            rules: Vec::new(),
            atoms: BTreeSet::new(),
            labels: Vec::new(),
            always_on: Vec::new(),
            control_index: HashMap::new(),
            symbol_index: HashMap::new(),
            rule_index: HashMap::new(),
        }
    }

    /// Returns the existing id when the name is already declared.
    pub fn control(&mut self, name: &str) -> ControlId {
        if let Some(&id) = self.control_index.get(name) {
            return id;
        }
        self.push_control(name, false)
    }

    fn push_control(&mut self, name: &str, synthetic: bool) -> ControlId {
        let id = ControlId(self.controls.len() as u32);
        self.controls.push(Named {
            name: name.to_string(),
            synthetic,
        });
        self.labels.push(BTreeSet::new());
        self.control_index.insert(name.to_string(), id);
        id
    }

    pub fn fresh_control(&mut self, hint: &str) -> ControlId {
        let mut n = self.controls.len();
        loop {
            let name = format!("{hint}~{n}");
            if !self.control_index.contains_key(&name) {
                return self.push_control(&name, true);
            }
            n += 1;
        }
    }

    pub fn symbol(&mut self, name: &str) -> Result<SymbolId, ModelError> {
        if name == BOTTOM_NAME {
            return Err(ModelError::BottomInRule(name.to_string()));
        }
        if let Some(&id) = self.symbol_index.get(name) {
            return Ok(id);
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(Named {
            name: name.to_string(),
            synthetic: false,
        });
        self.symbol_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn atom(&mut self, name: &str) {
        self.atoms.insert(name.to_string());
    }

    pub fn label(&mut self, control: ControlId, atom: &str) {
        self.atoms.insert(atom.to_string());
        self.labels[control.index()].insert(atom.to_string());
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    fn check_name(&self, name: &str) -> Result<(), ModelError> {
        if self.rule_index.contains_key(name) {
            return Err(ModelError::DuplicateRule(name.to_string()));
        }
        Ok(())
    }

    pub fn normal(
        &mut self,
        name: &str,
        from: ControlId,
        pop: SymbolId,
        to: ControlId,
        push: Vec<SymbolId>,
    ) -> Result<RuleId, ModelError> {
        self.check_name(name)?;
        if pop == BOTTOM || push.contains(&BOTTOM) {
            return Err(ModelError::BottomInRule(name.to_string()));
        }
        Ok(self.push_rule(
            name,
            RuleKind::Normal(NormalRule {
                from,
                pop,
                to,
                push,
            }),
            false,
        ))
    }

    /// Adds a modifying rule. `remove` and `add` may name rules that are
    /// added later; they are validated by [`SmPdsBuilder::build`].
    pub fn modifying(
        &mut self,
        name: &str,
        from: ControlId,
        remove: Vec<RuleId>,
        add: Vec<RuleId>,
        to: ControlId,
    ) -> Result<RuleId, ModelError> {
        self.check_name(name)?;
        let id = RuleId(self.rules.len() as u32);
        if remove.contains(&id) {
            return Err(ModelError::SelfRemoval(name.to_string()));
        }
        let width = remove
            .iter()
            .chain(add.iter())
            .map(|r| r.index() + 1)
            .max()
            .unwrap_or(0);
        let kind = RuleKind::Modifying(ModifyingRule {
            from,
            remove: RuleSet::from_ids(width, remove),
            add: RuleSet::from_ids(width, add),
            to,
        });
        Ok(self.push_rule(name, kind, false))
    }

    fn push_rule(&mut self, name: &str, kind: RuleKind, synthetic: bool) -> RuleId {
        let id = RuleId(self.rules.len() as u32);
        self.rules.push(Rule {
            name: name.to_string(),
            kind,
            synthetic,
        });
        self.rule_index.insert(name.to_string(), id);
        id
    }

    fn fresh_rule_name(&self, base: &str) -> String {
        let mut n = 1;
        loop {
            let name = format!("{base}~{n}");
            if !self.rule_index.contains_key(&name) {
                return name;
            }
            n += 1;
        }
    }

    pub fn build(self) -> Result<SmPds, ModelError> {
        let n = self.rules.len();
        let mut rules = self.rules;
        for (i, rule) in rules.iter_mut().enumerate() {
            if let RuleKind::Modifying(m) = &mut rule.kind {
                if let Some(bad) = m.remove.iter().chain(m.add.iter()).find(|r| r.index() >= n) {
                    return Err(ModelError::UnknownRuleId(bad.0));
                }
                if m.remove.contains(RuleId(i as u32)) {
                    return Err(ModelError::SelfRemoval(rule.name.clone()));
                }
                m.remove.grow(n);
                m.add.grow(n);
            }
        }
        for rule in &rules {
            for c in [rule.from(), rule.to()] {
                if c.index() >= self.controls.len() {
                    return Err(ModelError::UnknownControl(format!("#{}", c.0)));
                }
            }
            if let RuleKind::Normal(r) = &rule.kind {
                for s in std::iter::once(r.pop).chain(r.push.iter().copied()) {
                    if s.index() >= self.symbols.len() {
                        return Err(ModelError::UnknownSymbol(format!("#{}", s.0)));
                    }
                }
            }
        }
        Ok(SmPds {
            always_on: RuleSet::from_ids(n, self.always_on),
            controls: self.controls,
            symbols: self.symbols,
            rules,
            atoms: self.atoms,
            labels: self.labels,
            control_index: self.control_index,
            symbol_index: self.symbol_index,
            rule_index: self.rule_index,
        })
    }
}

/// A self-modifying Büchi pushdown system: an [`SmPds`] plus accepting
/// control points G.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmBpds {
    pds: SmPds,
    accepting: Vec<bool>,
}

impl SmBpds {
    pub fn is_accepting(&self, c: ControlId) -> bool {
        self.accepting[c.index()]
    }

    /// B(p): 1 iff p ∈ G.
    pub fn flag(&self, c: ControlId) -> bool {
        self.accepting[c.index()]
    }

    pub fn accepting(&self) -> impl Iterator<Item = ControlId> + '_ {
        self.accepting
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| ControlId(i as u32))
    }

    pub fn system(&self) -> &SmPds {
        &self.pds
    }

    pub fn into_system(self) -> SmPds {
        self.pds
    }
}

impl Deref for SmBpds {
    type Target = SmPds;

    fn deref(&self) -> &SmPds {
        &self.pds
    }
}

/// `(⟨p, w⟩, θ)`. The stack is stored top first and always ends in
/// [`BOTTOM`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub control: ControlId,
    pub stack: Vec<SymbolId>,
    pub phase: RuleSet,
}

impl Configuration {
    /// `stack` is given top first, without the bottom symbol.
    pub fn new(control: ControlId, mut stack: Vec<SymbolId>, phase: RuleSet) -> Self {
        stack.push(BOTTOM);
        Configuration {
            control,
            stack,
            phase,
        }
    }

    /// The top symbol, or `None` when only the bottom symbol is left.
    pub fn top(&self) -> Option<SymbolId> {
        self.stack.first().copied().filter(|&s| s != BOTTOM)
    }

    /// Stack height, bottom symbol excluded.
    pub fn height(&self) -> usize {
        self.stack.len() - 1
    }

    pub fn is_empty_stack(&self) -> bool {
        self.top().is_none()
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(<{}, {:?}>, {:?})",
            self.control.0,
            self.stack.iter().map(|s| s.0).collect::<Vec<_>>(),
            self.phase
        )
    }
}

/// A head `((p, γ), θ)` with θ interned in some [`PhaseTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Head {
    pub control: ControlId,
    pub top: SymbolId,
    pub phase: PhaseId,
}

/// Fires `rule` on `c` if it is applicable.
pub fn apply_rule(model: &SmPds, c: &Configuration, id: RuleId) -> Option<Configuration> {
    if !c.phase.contains(id) {
        return None;
    }
    let top = c.top()?;
    match &model.rule(id).kind {
        RuleKind::Normal(r) => {
            if r.from != c.control || r.pop != top {
                return None;
            }
            let mut stack = Vec::with_capacity(c.stack.len() + r.push.len());
            stack.extend_from_slice(&r.push);
            stack.extend_from_slice(&c.stack[1..]);
            Some(Configuration {
                control: r.to,
                stack,
                phase: c.phase.clone(),
            })
        }
        RuleKind::Modifying(r) => {
            if r.from != c.control || !r.remove.intersects(&c.phase) {
                return None;
            }
            Some(Configuration {
                control: r.to,
                stack: c.stack.clone(),
                phase: c.phase.rewrite(&r.remove, &r.add),
            })
        }
    }
}

/// All ⇒-successors of `c`, each paired with the rule that produced it.
pub fn successor_steps(model: &SmPds, c: &Configuration) -> Vec<(RuleId, Configuration)> {
    if c.is_empty_stack() {
        return Vec::new();
    }
    c.phase
        .iter()
        .filter(|id| id.index() < model.num_rules())
        .filter_map(|id| apply_rule(model, c, id).map(|next| (id, next)))
        .collect()
}

/// The set of ⇒-successors of `c`.
pub fn successors(model: &SmPds, c: &Configuration) -> BTreeSet<Configuration> {
    successor_steps(model, c)
        .into_iter()
        .map(|(_, next)| next)
        .collect()
}

/// Phases reachable from an initial phase through modifying rules, with the
/// phase-to-phase edges each rule induces.
#[derive(Clone, Debug)]
pub struct ReachablePhases {
    pub table: PhaseTable,
    pub initial: PhaseId,
    /// `(θ, r, θ')`: modifying rule `r` is enabled in θ and rewrites it to θ'.
    pub edges: Vec<(PhaseId, RuleId, PhaseId)>,
}

impl ReachablePhases {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn phases(&self) -> impl Iterator<Item = &RuleSet> {
        self.table.iter().map(|(_, s)| s)
    }
}

/// Least set of phases containing `initial` and closed under firing any
/// enabled modifying rule. Control points and stacks are ignored, so this
/// over-approximates the phases a run can visit.
pub fn reachable_phases(model: &SmPds, initial: &RuleSet) -> ReachablePhases {
    let mut table = PhaseTable::new();
    let mut start = initial.clone();
    start.grow(model.num_rules());
    let init = table.intern(&start);
    let modifying: Vec<(RuleId, &ModifyingRule)> = model.modifying_rules().collect();
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([init]);
    while let Some(id) = queue.pop_front() {
        for &(rid, rule) in &modifying {
            let theta = table.get(id);
            if !theta.contains(rid) || !rule.remove.intersects(theta) {
                continue;
            }
            let next = theta.rewrite(&rule.remove, &rule.add);
            let before = table.len();
            let nid = table.intern(&next);
            if table.len() > before {
                queue.push_back(nid);
            }
            edges.push((id, rid, nid));
        }
    }
    ReachablePhases {
        table,
        initial: init,
        edges,
    }
}

/// Splits every normal rule pushing more than two symbols into a chain of
/// rules through fresh control points, each pushing at most two.
///
/// The first rule of a chain keeps the original rule id, so remove/add sets
/// keep their meaning; the remaining chain rules are marked always enabled
/// (see [`SmPds::lift_phase`]). Fresh controls carry no atomic propositions.
pub fn normalize(model: &SmPds) -> Result<SmPds, ModelError> {
    for (id, rule) in model.modifying_rules() {
        if rule.remove.contains(id) {
            return Err(ModelError::SelfRemoval(model.rule_name(id).to_string()));
        }
    }
    if model.normal_rules().all(|(_, r)| r.push.len() <= 2) {
        return Ok(model.clone());
    }
    let mut builder = model.clone().into_builder();
    let long: Vec<(RuleId, NormalRule)> = model
        .normal_rules()
        .filter(|(_, r)| r.push.len() > 2)
        .map(|(id, r)| (id, r.clone()))
        .collect();
    for (id, rule) in long {
        // push = b1 b2 ... bn (top first). The chain first pushes b_{n-1} b_n,
        // then repeatedly replaces b_k by b_{k-1} b_k.
        let n = rule.push.len();
        let base = model.rule_name(id).to_string();
        let mut mid = builder.fresh_control(model.control_name(rule.from));
        builder.rules[id.index()].kind = RuleKind::Normal(NormalRule {
            from: rule.from,
            pop: rule.pop,
            to: mid,
            push: vec![rule.push[n - 2], rule.push[n - 1]],
        });
        for k in (1..n - 1).rev() {
            let last = k == 1;
            let next = if last {
                rule.to
            } else {
                builder.fresh_control(model.control_name(rule.from))
            };
            let name = builder.fresh_rule_name(&base);
            let rid = builder.push_rule(
                &name,
                RuleKind::Normal(NormalRule {
                    from: mid,
                    pop: rule.push[k],
                    to: next,
                    push: vec![rule.push[k - 1], rule.push[k]],
                }),
                true,
            );
            builder.always_on.push(rid);
            mid = next;
        }
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// P={p0,p1}, Γ={a}, r1: ⟨p0,a⟩↪⟨p1,aa⟩, r2: ⟨p1,a⟩↪⟨p0,ε⟩.
    fn push_pop() -> SmPds {
        let mut b = SmPdsBuilder::new();
        let p0 = b.control("p0");
        let p1 = b.control("p1");
        let a = b.symbol("a").unwrap();
        b.normal("r1", p0, a, p1, vec![a, a]).unwrap();
        b.normal("r2", p1, a, p0, vec![]).unwrap();
        b.build().unwrap()
    }

    /// r1: ⟨p0,a⟩↪⟨p1,a⟩, r2: ⟨p1,a⟩↪⟨p0,a⟩, r3: ⟨p1,a⟩↪⟨p2,ε⟩,
    /// c1: p0 -({r2},{r3})-> p1, Γ={a,b}.
    fn guarded_loop() -> SmPds {
        let mut b = SmPdsBuilder::new();
        let p0 = b.control("p0");
        let p1 = b.control("p1");
        let p2 = b.control("p2");
        let a = b.symbol("a").unwrap();
        b.symbol("b").unwrap();
        let r1 = b.normal("r1", p0, a, p1, vec![a]).unwrap();
        let r2 = b.normal("r2", p1, a, p0, vec![a]).unwrap();
        let r3 = b.normal("r3", p1, a, p2, vec![]).unwrap();
        let _ = r1;
        b.modifying("c1", p0, vec![r2], vec![r3], p1).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn push_pop_successor() {
        let m = push_pop();
        let theta = m.rule_set(["r1", "r2"]).unwrap();
        let c = m.configuration("p0", &["a"], theta.clone()).unwrap();
        let succ = successors(&m, &c);
        let expected = m.configuration("p1", &["a", "a"], theta).unwrap();
        assert_eq!(succ, BTreeSet::from([expected]));
    }

    #[test]
    fn guarded_loop_successors_include_modifying_step() {
        let m = guarded_loop();
        let theta0 = m.rule_set(["r1", "r2", "c1"]).unwrap();
        let theta1 = m.rule_set(["r1", "r3", "c1"]).unwrap();
        let c = m.configuration("p0", &["a"], theta0.clone()).unwrap();
        let succ = successors(&m, &c);
        let expected = BTreeSet::from([
            m.configuration("p1", &["a"], theta0).unwrap(),
            m.configuration("p1", &["a"], theta1).unwrap(),
        ]);
        assert_eq!(succ, expected);
    }

    #[test]
    fn no_applicable_rule_means_no_successor() {
        let m = push_pop();
        let c = m.configuration("p0", &["a"], m.rule_set(["r2"]).unwrap()).unwrap();
        assert!(successors(&m, &c).is_empty());
        let empty = m.configuration("p1", &[], m.all_rules()).unwrap();
        assert!(successors(&m, &empty).is_empty());
    }

    #[test]
    fn modifying_rule_needs_nonempty_stack() {
        let m = guarded_loop();
        let theta0 = m.rule_set(["r1", "r2", "c1"]).unwrap();
        let c = m.configuration("p0", &[], theta0).unwrap();
        assert!(successors(&m, &c).is_empty());
    }

    #[test]
    fn guarded_loop_reachable_phases() {
        let m = guarded_loop();
        let theta0 = m.rule_set(["r1", "r2", "c1"]).unwrap();
        let theta1 = m.rule_set(["r1", "r3", "c1"]).unwrap();
        let phases = reachable_phases(&m, &theta0);
        let got: BTreeSet<RuleSet> = phases.phases().cloned().collect();
        assert_eq!(got, BTreeSet::from([theta0, theta1]));
        assert_eq!(phases.edges.len(), 1);
    }

    #[test]
    fn reachable_phases_without_modifying_rules() {
        let m = push_pop();
        let theta = m.all_rules();
        assert_eq!(reachable_phases(&m, &theta).len(), 1);
    }

    #[test]
    fn disjoint_remove_set_never_fires() {
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let a = b.symbol("a").unwrap();
        let r1 = b.normal("r1", p, a, p, vec![a]).unwrap();
        let r2 = b.normal("r2", p, a, p, vec![]).unwrap();
        b.modifying("c", p, vec![r2], vec![r1], p).unwrap();
        let m = b.build().unwrap();
        let theta = m.rule_set(["r1", "c"]).unwrap();
        assert_eq!(reachable_phases(&m, &theta).len(), 1);
    }

    #[test]
    fn self_removal_is_rejected() {
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let err = b.modifying("c", p, vec![RuleId(0)], vec![], p).unwrap_err();
        assert!(matches!(err, ModelError::SelfRemoval(_)));
    }

    #[test]
    fn normalize_is_identity_on_short_rules() {
        let m = guarded_loop();
        assert_eq!(normalize(&m).unwrap(), m);
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let q = b.control("q");
        let a = b.symbol("a").unwrap();
        b.normal("pop", p, a, q, vec![]).unwrap();
        let m = b.build().unwrap();
        assert_eq!(normalize(&m).unwrap(), m);
    }

    #[test]
    fn normalize_splits_long_push() {
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let q = b.control("q");
        let a = b.symbol("a").unwrap();
        let bs = b.symbol("b").unwrap();
        let c = b.symbol("c").unwrap();
        b.normal("r", p, a, q, vec![bs, c, a]).unwrap();
        let m = b.build().unwrap();
        let n = normalize(&m).unwrap();
        assert!(n.normal_rules().all(|(_, r)| r.push.len() <= 2));
        assert_eq!(n.num_rules(), 2);
        assert_eq!(n.num_controls(), 3);
        assert!(n.is_synthetic_control(ControlId(2)));
        assert!(n.label(ControlId(2)).is_empty());

        let theta = n.lift_phase(&m.rule_set(["r"]).unwrap());
        let start = n.configuration("p", &["a"], theta.clone()).unwrap();
        let mid: Vec<_> = successors(&n, &start).into_iter().collect();
        assert_eq!(mid.len(), 1);
        let end: Vec<_> = successors(&n, &mid[0]).into_iter().collect();
        assert_eq!(end, vec![n.configuration("q", &["b", "c", "a"], theta).unwrap()]);
    }
}
