#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smpds_core::gen::{gen_random, GenParams};
use smpds_core::io::ModelBundle;
use smpds_core::{reachable_phases, ReachablePhases, SmBpds};

/// Parameters in the small size class: at most 5 controls, 4 symbols,
/// 8 normal and 3 modifying rules.
pub fn small_params(seed: u64) -> GenParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    GenParams {
        n_controls: rng.gen_range(2..=5),
        n_symbols: rng.gen_range(2..=4),
        n_normal: rng.gen_range(1..=8),
        n_modifying: rng.gen_range(0..=3),
        seed,
        ..GenParams::default()
    }
}

/// A small model with a seeded accepting set, its reachable phases, and
/// the bundle it came from.
pub fn small_bpds(seed: u64) -> (SmBpds, ReachablePhases, ModelBundle) {
    let bundle = gen_random(&small_params(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31) + 7);
    let accepting: Vec<_> = bundle.model.controls().filter(|_| rng.gen_bool(0.4)).collect();
    let model = bundle.model.clone().with_accepting(accepting);
    let phases = reachable_phases(&model, &bundle.theta0);
    (model, phases, bundle)
}
