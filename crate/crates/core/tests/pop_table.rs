mod common;

use smpds_core::oracle::audit_pop_table;
use smpds_core::prestar::pre_star_empty;

#[test]
fn pop_table_matches_bounded_search() {
    let mut beyond = 0;
    let mut total = 0;
    let mut confirmed = 0;
    for seed in 0..200 {
        let (model, phases, _) = common::small_bpds(seed);
        let pop = pre_star_empty(&model, &phases);
        let audit = audit_pop_table(&model, &phases, &pop, 12, 6);
        assert!(audit.clean(), "seed {seed}: {audit:?}");
        beyond += audit.beyond_bounds;
        total += audit.transitions;
        confirmed += audit.confirmed;
    }
    eprintln!("entries {total}, confirmed {confirmed}, beyond bounds {beyond}");
}

#[test]
fn audit_flags_planted_errors() {
    use smpds_core::prestar::{Derivation, LabeledAutomaton, Transition};
    let mut planted = 0;
    let mut dropped = 0;
    for seed in 0..40 {
        let (model, phases, _) = common::small_bpds(seed);
        let pop = pre_star_empty(&model, &phases);
        let theta = phases.initial;
        let p = model.controls().next().unwrap();
        let g = model.symbols().next().unwrap();
        let bogus = Transition {
            src: pop.control_state(p, theta),
            symbol: g,
            bit: true,
            dst: pop.control_state(p, theta),
        };
        if !pop.contains(&bogus) {
            let mut forged = pop.clone();
            forged.add(bogus, Derivation::Seed);
            let audit = audit_pop_table(&model, &phases, &forged, 12, 6);
            if audit.unsound.contains(&bogus) {
                planted += 1;
            }
        }
        if !pop.is_empty() {
            let mut thinned = LabeledAutomaton::new(model.num_controls(), phases.table.clone());
            for t in &pop.transitions()[1..] {
                thinned.add(*t, Derivation::Seed);
            }
            assert!(!audit_pop_table(&model, &phases, &thinned, 12, 6).missing.is_empty(), "seed {seed}");
            dropped += 1;
        }
    }
    assert!(planted > 10 && dropped > 10, "planted {planted}, dropped {dropped}");
}
