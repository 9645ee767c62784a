use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("supercritical: no growth exponent exists (lambda = {lambda}, Lambda = {hardy})")]
    Supercritical { lambda: f64, hardy: f64 },

    #[error("nonconvergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("positivity lost at node {node} (value {value:e})")]
    PositivityLost { node: usize, value: f64 },

    #[error("operator is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("insufficient points: {found} in window, need at least {needed}")]
    InsufficientPoints { found: usize, needed: usize },

    #[error("nonpositive values in window")]
    NonPositiveInWindow,

    #[error("inf is zero")]
    InfIsZero,

    #[error("config error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config validation: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
