use std::path::PathBuf;

use cheaptalk::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("bad argument: {0}")]
    Argument(String),

    #[error("{0}")]
    Precondition(String),

    #[error("{0} expected value(s) did not match")]
    Mismatch(usize),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 0 ok, 1 mismatch, 2 parse, 3 chain invalid, 4 precondition, 5 copula invalid.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Io { .. } | CliError::Argument(_) | CliError::Json(_) => 2,
            CliError::Precondition(_) => 4,
            CliError::Csv(_) => 1,
            CliError::Core(e) => match e {
                CoreError::Parse(_) | CoreError::Dimension(_) => 2,
                CoreError::NotIrreducible
                | CoreError::Periodic(_)
                | CoreError::InvalidTransition(_)
                | CoreError::InvalidDistribution(_) => 3,
                CoreError::Precondition(_)
                | CoreError::CapExceeded { .. }
                | CoreError::ZeroProbability(_)
                | CoreError::InvalidStrategy(_) => 4,
                CoreError::NotCopula(_) | CoreError::NotDoublyStochastic(_) => 5,
                CoreError::Internal(_) => 1,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
