use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("sort error: {0}")]
    Sort(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    /// Extraction recursed deeper than the number of classes, so the
    /// representative graph has a cycle.
    #[error("extraction budget of {budget} exceeded: representative function is not admissible")]
    ExtractionBudget { budget: usize },

    #[error("saturation budget of {0} rule applications exceeded")]
    SaturationBudget(usize),

    #[error("model does not satisfy the input: {0}")]
    ModelMismatch(String),

    #[error("no interpretation for `{0}`")]
    MissingInterpretation(String),

    #[error("{0} is outside the Int window")]
    OutOfWindow(i64),

    #[error("model error: {0}")]
    Model(String),

    #[error("search space of {0} interpretations is too large")]
    SearchSpaceTooLarge(u128),
}

pub type Result<T> = std::result::Result<T, Error>;
