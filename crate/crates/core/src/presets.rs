//! Named malicious-behavior formulas over API-call atoms.

use crate::ltl::{parse_ltl, Formula};

/// (name, formula text) pairs.
pub const PRESETS: &[(&str, &str)] = &[
    ("registry-key", "F(call_GetModuleFileNameA && F call_RegSetValueExA)"),
    (
        "data-steal",
        "F(call_GetModuleHandleA && F(call_FindFirstFileA && F(call_CreateFileMappingA && F(call_MapViewOfFile && F call_CopyFileA))))",
    ),
    (
        "spy-worm",
        "F((call_GetAsyncKeyState || call_GetRawInputData) && F(call_sendto || call_send))",
    ),
];

pub fn preset(name: &str) -> Option<Formula> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_ltl(text).expect("preset formulas parse"))
}
