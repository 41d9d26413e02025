use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid transition matrix: {0}")]
    InvalidTransition(String),

    #[error("Markov chain is not irreducible")]
    NotIrreducible,

    #[error("Markov chain is periodic (period {0})")]
    Periodic(usize),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("invalid stationary strategy: {0}")]
    InvalidStrategy(String),

    #[error("matrix is not a copula for the given margin: {0}")]
    NotCopula(String),

    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),

    #[error("enumeration cap exceeded: {what} = {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("zero-probability conditioning event: {0}")]
    ZeroProbability(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
