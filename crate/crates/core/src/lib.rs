//! LTL model checking for self-modifying pushdown systems.

pub mod error;
pub mod graph;
pub mod ltl;
pub mod model;
pub mod phase;

pub use error::{Error, ModelError, ParseError};
pub use model::*;
pub use phase::{PhaseId, PhaseTable, RuleSet};
pub mod prestar;
pub mod product;
pub mod headgraph;
pub mod oracle;
pub mod io;
pub mod gen;
pub mod presets;
