//! Workloads shared by the benchmarks.

use smpds_core::gen::{gen_random, GenParams};
use smpds_core::io::ModelBundle;
use smpds_core::ltl::{parse_ltl, Formula};

/// A generated model of the given S1/S2 shape paired with a two-step
/// reachability property over its atoms.
pub fn workload(s1: usize, s2: usize, seed: u64) -> (ModelBundle, Formula) {
    let bundle = gen_random(&GenParams::scaled(s1, s2, seed));
    let phi = parse_ltl("F(x0 && F x1)").expect("formula parses");
    (bundle, phi)
}
