//! LTL formulas and their translation to Büchi automata.

pub mod buchi;
pub mod formula;

pub use buchi::{
    guard_matches, ltl_to_buchi, parse_buchi, BuchiAutomaton, BuchiTransition, GeneralizedBuchi,
    TransitionGuard,
};
pub use formula::{eval_lasso, parse_ltl, parse_ltl_checked, to_nnf, AtomSet, EmptyCycle, Formula};
