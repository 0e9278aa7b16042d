use thiserror::Error;

/// Errors produced by graph, word and complex operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("invalid operation: {0}")]
    InvalidOperation(String),

    #[error("completion did not finish within budget")]
    PartialCompletion,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no generating set available for this subgroup handle")]
    MissingGenerators,
}

pub type Result<T> = std::result::Result<T, Error>;
