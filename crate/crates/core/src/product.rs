//! Product of a self-modifying pushdown system with a Büchi automaton.

use crate::error::ModelError;
use crate::ltl::BuchiAutomaton;
use crate::model::{ControlId, Configuration, RuleId, RuleKind, SmBpds, SmPds, SmPdsBuilder};
use crate::phase::RuleSet;

/// For every source rule, the product rules built from it. Images of
/// distinct source rules are disjoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProdMap {
    images: Vec<Vec<RuleId>>,
    num_product_rules: usize,
}

impl ProdMap {
    pub fn image(&self, rule: RuleId) -> &[RuleId] {
        &self.images[rule.index()]
    }

    /// prod(σ): the union of the images of the rules in σ.
    pub fn image_of_set(&self, set: &RuleSet) -> RuleSet {
        let mut out = RuleSet::empty(self.num_product_rules);
        for r in set.iter().filter(|r| r.index() < self.images.len()) {
            for &p in &self.images[r.index()] {
                out.insert(p);
            }
        }
        out
    }

    /// The source rule a product rule was built from.
    pub fn source_of(&self, product_rule: RuleId) -> Option<RuleId> {
        self.images
            .iter()
            .position(|img| img.contains(&product_rule))
            .map(|i| RuleId(i as u32))
    }
}

/// The product system together with how it relates to its inputs.
#[derive(Clone, Debug)]
pub struct Product {
    pub system: SmBpds,
    pub map: ProdMap,
    /// prod(θ0).
    pub phase: RuleSet,
    num_ba_states: usize,
}

impl Product {
    /// The product control (p, q).
    pub fn control(&self, p: ControlId, q: usize) -> ControlId {
        ControlId((p.index() * self.num_ba_states + q) as u32)
    }

    /// Splits a product control into (p, q).
    pub fn split(&self, c: ControlId) -> (ControlId, usize) {
        let i = c.index();
        (ControlId((i / self.num_ba_states) as u32), i % self.num_ba_states)
    }
}

/// Builds BP_φ. Controls are P × Q, numbered `p * |Q| + q`; accepting
/// controls are P × F; the returned phase is prod(θ0).
pub fn build_product(
    model: &SmPds,
    ba: &BuchiAutomaton,
    theta0: &RuleSet,
) -> Result<Product, ModelError> {
    if let Some(bad) = theta0.iter().find(|r| r.index() >= model.num_rules()) {
        return Err(ModelError::UnknownRuleId(bad.0));
    }
    let nq = ba.num_states();
    let mut b = SmPdsBuilder::new();
    for atom in model.atoms() {
        b.atom(atom);
    }
    for p in model.controls() {
        for q in 0..nq {
            let c = b.control(&format!("{}@{}", model.control_name(p), ba.states[q]));
            for atom in model.label(p) {
                b.label(c, atom);
            }
        }
    }
    for s in model.symbols() {
        b.symbol(model.symbol_name(s))?;
    }
    let ctrl = |p: ControlId, q: usize| ControlId((p.index() * nq + q) as u32);

    // Enumerate product rules first so σ images are known before modifying
    // rules are created. A rule no transition matches still gets an inert
    // marker in its image, so that σ ∩ θ ≠ ∅ survives the mapping.
    let mut pairs = Vec::new();
    let mut images = vec![Vec::new(); model.num_rules()];
    for (id, rule) in model.rules() {
        let label = model.label(rule.from());
        for (k, t) in ba.transitions.iter().enumerate() {
            if t.guard.matches(label) {
                images[id.index()].push(RuleId(pairs.len() as u32));
                pairs.push((id, Some(k)));
            }
        }
        if images[id.index()].is_empty() {
            images[id.index()].push(RuleId(pairs.len() as u32));
            pairs.push((id, None));
        }
    }
    let map = ProdMap {
        images,
        num_product_rules: pairs.len(),
    };
    for &(id, k) in &pairs {
        let rule = model.rule(id);
        let Some(k) = k else {
            // Empty σ: never enabled.
            let c = ctrl(rule.from(), ba.initial);
            b.modifying(&format!("{}@-", rule.name), c, Vec::new(), Vec::new(), c)?;
            continue;
        };
        let t = &ba.transitions[k];
        let name = format!("{}@{}", rule.name, k);
        match &rule.kind {
            RuleKind::Normal(r) => {
                b.normal(&name, ctrl(r.from, t.src), r.pop, ctrl(r.to, t.dst), r.push.clone())?;
            }
            RuleKind::Modifying(r) => {
                let remove = map.image_of_set(&r.remove).iter().collect();
                let add = map.image_of_set(&r.add).iter().collect();
                b.modifying(&name, ctrl(r.from, t.src), remove, add, ctrl(r.to, t.dst))?;
            }
        }
    }
    let pds = b.build()?;
    let accepting: Vec<ControlId> = model
        .controls()
        .flat_map(|p| (0..nq).filter(|&q| ba.accepting[q]).map(move |q| ctrl(p, q)))
        .collect();
    let mut phase = map.image_of_set(theta0);
    phase.grow(pds.num_rules());
    Ok(Product {
        system: pds.with_accepting(accepting),
        map,
        phase,
        num_ba_states: nq,
    })
}

/// (⟨p, w⟩, θ) becomes (⟨(p, q0), w⟩, prod(θ)).
pub fn initial_product_config(c0: &Configuration, ba: &BuchiAutomaton, product: &Product) -> Configuration {
    Configuration {
        control: product.control(c0.control, ba.initial),
        stack: c0.stack.clone(),
        phase: product.map.image_of_set(&c0.phase),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{ltl_to_buchi, parse_ltl, to_nnf};
    use crate::model::SymbolId;

    fn ba(text: &str) -> BuchiAutomaton {
        ltl_to_buchi(&to_nnf(&parse_ltl(text).unwrap()))
    }

    fn single(label: bool) -> SmPds {
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let a = b.symbol("a").unwrap();
        b.atom("x");
        if label {
            b.label(p, "x");
        }
        b.normal("r", p, a, p, vec![a]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn globally_product_has_one_rule() {
        let m = single(true);
        let prod = build_product(&m, &ba("G x"), &m.all_rules()).unwrap();
        let sys = &prod.system;
        assert_eq!(sys.num_rules(), 1);
        assert_eq!(sys.num_controls(), 1);
        let r = sys.rule(RuleId(0)).as_normal().unwrap();
        assert_eq!((r.from, r.to), (ControlId(0), ControlId(0)));
        assert_eq!(sys.accepting().collect::<Vec<_>>(), vec![ControlId(0)]);
        assert_eq!(prod.phase.len(), 1);
    }

    #[test]
    fn failing_guard_leaves_an_inert_marker() {
        let m = single(false);
        let prod = build_product(&m, &ba("G x"), &m.all_rules()).unwrap();
        assert_eq!(prod.system.num_rules(), 1);
        assert_eq!(prod.system.num_modifying(), 1);
        assert_eq!(prod.phase.len(), 1);
        let c0 = Configuration::new(ControlId(0), vec![SymbolId(1)], prod.phase.clone());
        assert!(crate::model::successors(&prod.system, &c0).is_empty());
    }

    #[test]
    fn marker_keeps_a_modifying_rule_enabled() {
        // c removes r, whose source never matches the guard; c must still fire.
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let q = b.control("q");
        let a = b.symbol("a").unwrap();
        b.atom("x");
        b.label(p, "x");
        let r = b.normal("r", q, a, q, vec![a]).unwrap();
        b.modifying("c", p, vec![r], vec![], p).unwrap();
        let m = b.build().unwrap();
        let prod = build_product(&m, &ba("G x"), &m.all_rules()).unwrap();
        let c0 = Configuration::new(prod.control(p, 0), vec![a], prod.phase.clone());
        assert_eq!(crate::model::successors(&prod.system, &c0).len(), 1);
    }

    #[test]
    fn modifying_rule_maps_sets_through_images() {
        let mut b = SmPdsBuilder::new();
        let p = b.control("p");
        let a = b.symbol("a").unwrap();
        let r = b.normal("r", p, a, p, vec![a]).unwrap();
        b.modifying("c", p, vec![r], vec![r], p).unwrap();
        let m = b.build().unwrap();
        let prod = build_product(&m, &ba("true"), &m.all_rules()).unwrap();
        let img_r = prod.map.image(RuleId(0)).to_vec();
        let img_c = prod.map.image(RuleId(1));
        assert_eq!(img_r.len(), 1);
        let c = prod.system.rule(img_c[0]).as_modifying().unwrap();
        assert_eq!(c.remove.iter().collect::<Vec<_>>(), img_r);
        assert_eq!(c.remove, c.add);
        assert_eq!(prod.map.source_of(img_c[0]), Some(RuleId(1)));
    }

    #[test]
    fn initial_config_pairs_with_initial_state() {
        let m = single(true);
        let automaton = ba("G x");
        let prod = build_product(&m, &automaton, &m.all_rules()).unwrap();
        let c0 = m.configuration("p", &["a"], m.all_rules()).unwrap();
        let pc = initial_product_config(&c0, &automaton, &prod);
        assert_eq!(pc.control, prod.control(c0.control, automaton.initial));
        assert_eq!(pc.stack, c0.stack);
        assert_eq!(pc.phase, prod.phase);
        let empty = m.configuration("p", &["a"], m.empty_rule_set()).unwrap();
        assert!(initial_product_config(&empty, &automaton, &prod).phase.is_empty());
    }
}
