//! Seeded random models and formulas.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::ModelBundle;
use crate::ltl::Formula;
use crate::model::{ControlId, Configuration, RuleId, SmPdsBuilder, SymbolId};

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n_controls: usize,
    pub n_symbols: usize,
    /// S1: normal rules.
    pub n_normal: usize,
    /// S2: modifying rules.
    pub n_modifying: usize,
    /// At most 2.
    pub max_push: usize,
    /// Probability that a control carries a given atom.
    pub p_g: f64,
    /// Atoms `x0`, `x1`, ...
    pub n_atoms: usize,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_controls: 4,
            n_symbols: 3,
            n_normal: 6,
            n_modifying: 2,
            max_push: 2,
            p_g: 0.4,
            n_atoms: 2,
            seed: 0,
        }
    }
}

impl GenParams {
    /// Shape used for the S1/S2 scaling rows: one control per four normal
    /// rules, four stack symbols.
    pub fn scaled(s1: usize, s2: usize, seed: u64) -> Self {
        GenParams {
            n_controls: (s1 / 4).max(2),
            n_symbols: 4,
            n_normal: s1,
            n_modifying: s2,
            seed,
            ..GenParams::default()
        }
    }
}

pub fn atom_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// A reproducible random model. Every control gets an outgoing rule when
/// there are enough normal rules; the initial phase holds every rule.
pub fn gen_random(params: &GenParams) -> ModelBundle {
    assert!(params.n_controls >= 1 && params.n_symbols >= 1 && params.n_normal >= 1);
    assert!(params.max_push <= 2, "max_push must be at most 2");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut b = SmPdsBuilder::new();
    let controls: Vec<ControlId> = (0..params.n_controls).map(|i| b.control(&format!("p{i}"))).collect();
    let symbols: Vec<SymbolId> = (0..params.n_symbols)
        .map(|i| b.symbol(&format!("g{i}")).expect("fresh symbol"))
        .collect();
    let atoms = atom_names(params.n_atoms);
    for a in &atoms {
        b.atom(a);
    }
    for &c in &controls {
        for a in &atoms {
            if rng.gen_bool(params.p_g) {
                b.label(c, a);
            }
        }
    }
    for i in 0..params.n_normal {
        let from = if i < controls.len() { controls[i] } else { *controls.choose(&mut rng).unwrap() };
        let pop = *symbols.choose(&mut rng).unwrap();
        let to = *controls.choose(&mut rng).unwrap();
        let len = rng.gen_range(0..=params.max_push);
        let push = (0..len).map(|_| *symbols.choose(&mut rng).unwrap()).collect();
        b.normal(&format!("r{i}"), from, pop, to, push).expect("valid rule");
    }
    let total = params.n_normal + params.n_modifying;
    for i in 0..params.n_modifying {
        let me = params.n_normal + i;
        let others: Vec<RuleId> = (0..total).filter(|&r| r != me).map(|r| RuleId(r as u32)).collect();
        let pick = |rng: &mut ChaCha8Rng| {
            let k = rng.gen_range(1..=2).min(others.len());
            others.choose_multiple(rng, k).copied().collect::<Vec<_>>()
        };
        let remove = pick(&mut rng);
        let add = pick(&mut rng);
        let from = *controls.choose(&mut rng).unwrap();
        let to = *controls.choose(&mut rng).unwrap();
        b.modifying(&format!("c{i}"), from, remove, add, to).expect("valid rule");
    }
    let model = b.build().expect("generated model is well formed");
    let theta0 = model.all_rules();
    let c0 = Configuration::new(controls[0], vec![symbols[0]], theta0.clone());
    ModelBundle { model, theta0, c0 }
}

/// A random formula in negation normal form with exactly `size`
/// operators, at most `max_temporal` of them temporal.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[String], size: usize, max_temporal: usize) -> Formula {
    let mut temporal = max_temporal;
    build(rng, atoms, size, &mut temporal)
}

fn build<R: Rng>(rng: &mut R, atoms: &[String], size: usize, temporal: &mut usize) -> Formula {
    if size == 0 {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(atoms.choose(rng).unwrap()),
        };
    }
    // Negation only on atoms keeps the formula in NNF.
    let unary_ops: &[&str] = if *temporal > 0 { &["!", "X", "F", "G"] } else { &["!"] };
    let binary_ops: &[&str] = if *temporal > 0 { &["&&", "||", "U", "R"] } else { &["&&", "||"] };
    let unary = size == 1 || rng.gen_bool(0.4);
    if unary {
        let op = *unary_ops.choose(rng).unwrap();
        if op == "!" {
            if size == 1 {
                return Formula::not(Formula::atom(atoms.choose(rng).unwrap()));
            }
            return build(rng, atoms, size, temporal);
        }
        *temporal -= 1;
        let inner = build(rng, atoms, size - 1, temporal);
        return match op {
            "X" => Formula::next(inner),
            "F" => Formula::eventually(inner),
            _ => Formula::globally(inner),
        };
    }
    let op = *binary_ops.choose(rng).unwrap();
    if matches!(op, "U" | "R") {
        *temporal -= 1;
    }
    let left_size = rng.gen_range(0..size);
    let left = build(rng, atoms, left_size, temporal);
    let right = build(rng, atoms, size - 1 - left_size, temporal);
    match op {
        "&&" => Formula::and(left, right),
        "||" => Formula::or(left, right),
        "U" => Formula::until(left, right),
        _ => Formula::release(left, right),
    }
}
