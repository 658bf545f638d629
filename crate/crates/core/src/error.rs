use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file could not be parsed in its declared format.
    #[error("format error in {context}: {message}")]
    Format { context: String, message: String },

    #[error("invalid url {url:?}: {reason}")]
    Url { url: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Regressor matrix is (numerically) rank deficient.
    #[error("singular regressor matrix: column {column} pivot ratio {ratio:.3e}")]
    Singular { column: usize, ratio: f64 },

    #[error("matrix is not positive definite: pivot {pivot} has value {value:.6e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {diff:.3e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-stationary process: companion spectral radius {radius:.6}")]
    NonStationary { radius: f64 },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("missing artifact {path}; rerun the `{stage}` stage")]
    MissingArtifact { path: PathBuf, stage: &'static str },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Format {
            context: context.into(),
            message: message.to_string(),
        }
    }

    /// Validation failures (bad config, bad inputs) as opposed to runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Precondition(_))
    }
}
