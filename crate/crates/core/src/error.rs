use thiserror::Error;

/// Errors raised across the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested quantity does not exist for these parameters (e.g. a mean with xi <= 1).
    #[error("does not exist: {0}")]
    Existence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Input data is degenerate (constant sample, zero spread, flat regression).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iterative method hit its iteration cap; carries the last iterate.
    #[error("no convergence after {iterations} iterations (last iterate {last})")]
    NonConvergence { iterations: usize, last: f64 },

    #[error("residual has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 1 usage or configuration, 2 data, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::InvalidInput(_)
            | Error::Parse { .. }
            | Error::Schema(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::Domain(_)
            | Error::Existence(_)
            | Error::Unsupported(_)
            | Error::Degenerate(_)
            | Error::NonConvergence { .. }
            | Error::NoSignChange { .. } => 3,
        }
    }
}
