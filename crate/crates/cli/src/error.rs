use thiserror::Error;

/// Failures surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config keys or values. Exit code 2.
    #[error("usage: {0}")]
    Usage(String),

    /// A numerical routine failed. Exit code 1.
    #[error("computation failed: {0}")]
    Compute(#[from] dressed_ring::Error),

    /// The requested state does not exist, e.g. a parity branch with no root in an interval.
    #[error("{0}")]
    NoState(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
