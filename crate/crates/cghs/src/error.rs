use thiserror::Error;

/// Errors produced by the samplers, generators, and summarizers.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or configuration parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Inputs are structurally inconsistent (dimensions, statuses, empty draws).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The data cannot be handled by the requested sampler or mechanism.
    #[error("unsupported data: {0}")]
    UnsupportedData(String),

    /// A factorization or eigendecomposition failed.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A file could not be parsed as the expected CSV/JSON layout.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    /// True for errors that stem from a failed numerical routine rather than
    /// bad user input; the CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
