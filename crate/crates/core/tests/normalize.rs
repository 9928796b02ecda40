use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smpds_core::oracle::bounded_explore;
use smpds_core::{normalize, Configuration, RuleId, RuleSet, SmPds, SmPdsBuilder};

/// A model whose normal rules push up to four symbols.
fn long_push_model(seed: u64) -> SmPds {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = SmPdsBuilder::new();
    let controls: Vec<_> = (0..3).map(|i| b.control(&format!("p{i}"))).collect();
    let symbols: Vec<_> = (0..3).map(|i| b.symbol(&format!("g{i}")).unwrap()).collect();
    let n = rng.gen_range(2..=6);
    for i in 0..n {
        let from = *controls.choose(&mut rng).unwrap();
        let to = *controls.choose(&mut rng).unwrap();
        let pop = *symbols.choose(&mut rng).unwrap();
        let len = rng.gen_range(0..=4);
        let push = (0..len).map(|_| *symbols.choose(&mut rng).unwrap()).collect();
        b.normal(&format!("r{i}"), from, pop, to, push).unwrap();
    }
    let from = controls[0];
    let victim = RuleId(rng.gen_range(0..n) as u32);
    let gift = RuleId(rng.gen_range(0..n) as u32);
    b.modifying("c0", from, vec![victim], vec![gift], controls[1]).unwrap();
    b.build().unwrap()
}

fn explore(model: &SmPds, c0: &Configuration, depth: usize, stack: usize) -> BTreeSet<Configuration> {
    bounded_explore(&model.clone().with_accepting([]), c0, depth, stack)
        .targets()
        .cloned()
        .collect()
}

/// Drops configurations at synthetic controls and the synthetic rules
/// from phases.
fn project(configs: &BTreeSet<Configuration>, original: &SmPds) -> BTreeSet<Configuration> {
    configs
        .iter()
        .filter(|c| c.control.index() < original.num_controls())
        .map(|c| Configuration {
            control: c.control,
            stack: c.stack.clone(),
            phase: RuleSet::from_ids(original.num_rules(), c.phase.iter().filter(|r| r.index() < original.num_rules())),
        })
        .collect()
}

#[test]
fn normalized_models_reach_the_same_configurations() {
    for seed in 0..150 {
        let model = long_push_model(seed);
        let normal = normalize(&model).unwrap();
        assert!(normal.normal_rules().all(|(_, r)| r.push.len() <= 2));
        let theta0 = model.all_rules();
        let c0 = Configuration::new(model.controls().next().unwrap(), vec![model.symbols().next().unwrap()], theta0.clone());
        let lifted = Configuration { phase: normal.lift_phase(&theta0), ..c0.clone() };

        let short = explore(&model, &c0, 5, 8);
        let deep = explore(&model, &c0, 15, 10);
        let via_normal = project(&explore(&normal, &lifted, 15, 10), &model);
        assert!(short.is_subset(&via_normal), "seed {seed}: normalization loses configurations");
        assert!(via_normal.is_subset(&deep), "seed {seed}: normalization adds configurations");
    }
}

#[test]
fn normal_models_are_unchanged() {
    let mut b = SmPdsBuilder::new();
    let p = b.control("p");
    let a = b.symbol("a").unwrap();
    b.normal("r", p, a, p, vec![a, a]).unwrap();
    let model = b.build().unwrap();
    assert_eq!(normalize(&model).unwrap(), model);
}
