mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smpds_core::gen::{gen_random, GenParams};
use smpds_core::io::{parse_model, print_model, ModelBundle};
use smpds_core::oracle::{bounded_explore, replay_rules, translate_to_pds};
use smpds_core::prestar::{pre_star_empty, LabeledAutomaton, StateKind};
use smpds_core::product::build_product;
use smpds_core::ltl::{ltl_to_buchi, parse_ltl, to_nnf};
use smpds_core::{reachable_phases, successors, Configuration, RuleId, RuleSet, SmBpds};

/// Reorders the rule declarations of a printed model.
fn shuffle_rules(text: &str, seed: u64) -> String {
    let mut lines: Vec<&str> = text.lines().collect();
    let slots: Vec<usize> = (0..lines.len())
        .filter(|&i| lines[i].starts_with("rule ") || lines[i].starts_with("crule "))
        .collect();
    let mut rules: Vec<&str> = slots.iter().map(|&i| lines[i]).collect();
    rules.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for (&i, r) in slots.iter().zip(rules) {
        lines[i] = r;
    }
    lines.join("\n") + "\n"
}

/// Pop-table entries in terms of names, so that models differing only in
/// rule order can be compared.
fn named_pop_table(model: &SmBpds, pop: &LabeledAutomaton) -> BTreeSet<(String, String, bool, String)> {
    let name = |s| match pop.kind(s) {
        StateKind::Control(p, theta) => {
            let mut rules: Vec<&str> = pop.phases().get(theta).iter().map(|r| model.rule_name(r)).collect();
            rules.sort_unstable();
            format!("{}:{}", model.control_name(p), rules.join(","))
        }
        StateKind::Aux(i) => format!("aux{i}"),
    };
    pop.transitions()
        .iter()
        .map(|t| (name(t.src), model.symbol_name(t.symbol).to_string(), t.bit, name(t.dst)))
        .collect()
}

fn with_seeded_g(bundle: &ModelBundle) -> SmBpds {
    let accepting: Vec<_> = bundle.model.controls().filter(|p| p.index() % 2 == 0).collect();
    bundle.model.clone().with_accepting(accepting)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_models_parse_back(seed in any::<u64>(), controls in 1usize..6, symbols in 1usize..5,
                                 normal in 1usize..10, modifying in 0usize..4) {
        let b = gen_random(&GenParams { n_controls: controls, n_symbols: symbols, n_normal: normal,
                                        n_modifying: modifying, seed, ..GenParams::default() });
        prop_assert_eq!(parse_model(&print_model(&b)).unwrap(), b);
    }

    #[test]
    fn saturation_ignores_rule_order(seed in 0u64..10_000, perm in any::<u64>()) {
        let bundle = gen_random(&common::small_params(seed));
        let shuffled = parse_model(&shuffle_rules(&print_model(&bundle), perm)).unwrap();
        let (m1, m2) = (with_seeded_g(&bundle), with_seeded_g(&shuffled));
        let t1 = named_pop_table(&m1, &pre_star_empty(&m1, &reachable_phases(&m1, &bundle.theta0)));
        let t2 = named_pop_table(&m2, &pre_star_empty(&m2, &reachable_phases(&m2, &shuffled.theta0)));
        prop_assert_eq!(t1, t2);
    }

    #[test]
    fn phase_image_commutes_with_rewriting(seed in 0u64..10_000, bits in any::<[u64; 3]>()) {
        let bundle = gen_random(&common::small_params(seed));
        let ba = ltl_to_buchi(&to_nnf(&parse_ltl("x0 U G x1").unwrap()));
        let product = build_product(&bundle.model.clone().with_accepting([]), &ba, &bundle.theta0).unwrap();
        let n = bundle.model.num_rules();
        let pick = |mask: u64| RuleSet::from_ids(n, (0..n).filter(|i| mask >> i & 1 == 1).map(|i| RuleId(i as u32)));
        let (theta, sigma, sigma2) = (pick(bits[0]), pick(bits[1]), pick(bits[2]));
        let img = |s: &RuleSet| product.map.image_of_set(s);
        prop_assert_eq!(img(&theta.rewrite(&sigma, &sigma2)), img(&theta).rewrite(&img(&sigma), &img(&sigma2)));
        for r in bundle.model.rule_ids() {
            for &q in product.map.image(r) {
                prop_assert_eq!(product.map.source_of(q), Some(r));
            }
        }
    }
}

#[test]
fn explore_facts_replay() {
    for seed in 0..100 {
        let (model, _, bundle) = common::small_bpds(seed);
        let facts = bounded_explore(&model, &bundle.c0, 8, 5);
        for c in facts.targets() {
            let rules = facts.witness(c, false).or_else(|| facts.witness(c, true)).expect("witness");
            assert_eq!(replay_rules(&model, &bundle.c0, &rules).unwrap().0, *c, "seed {seed}");
            if facts.reaches_through_g(c) {
                let rules = facts.witness(c, true).unwrap();
                let (end, g) = replay_rules(&model, &bundle.c0, &rules).unwrap();
                assert!(g && end == *c, "seed {seed}");
            }
        }
    }
}

#[test]
fn translation_steps_in_lockstep() {
    for seed in 0..100 {
        let (model, _, bundle) = common::small_bpds(seed);
        let tr = translate_to_pds(&model, &bundle.theta0).unwrap();
        let mut layer = BTreeSet::from([bundle.c0.clone()]);
        let mut seen = layer.clone();
        for _ in 0..8 {
            let mut next = BTreeSet::new();
            for c in &layer {
                let succ = successors(&model, c);
                let mapped: BTreeSet<Configuration> = succ.iter().map(|s| tr.config(s).unwrap()).collect();
                let direct = successors(&tr.system, &tr.config(c).unwrap());
                assert_eq!(mapped, direct, "seed {seed} at {c:?}");
                for s in succ {
                    if s.height() <= 6 && seen.insert(s.clone()) {
                        next.insert(s);
                    }
                }
            }
            layer = next;
        }
    }
}
