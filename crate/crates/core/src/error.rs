use thiserror::Error;

/// Errors raised while constructing or transforming a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown control point `{0}`")]
    UnknownControl(String),
    #[error("unknown stack symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule id {0} is out of range")]
    UnknownRuleId(u32),
    #[error("duplicate rule `{0}`")]
    DuplicateRule(String),
    #[error("modifying rule `{0}` removes itself")]
    SelfRemoval(String),
    #[error("rule `{0}` mentions the reserved bottom symbol")]
    BottomInRule(String),
}

/// A diagnostic from one of the text front ends, tagged with its position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Top-level error for the checking pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("initial phase references unknown rule id {0}")]
    PhaseOutOfRange(u32),
}
