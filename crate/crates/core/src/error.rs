use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum TriadError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("unequal variances ({0} vs {1}); use chernoff_full_gaussian")]
    UnequalVariance(f64, f64),

    #[error("empty cell {cell}: {reason}")]
    EmptyCell { cell: String, reason: String },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("constant column `{0}` cannot be standardized")]
    ConstantColumn(String),

    #[error("zero density at evaluation point")]
    ZeroDensity,

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, TriadError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> TriadError {
    TriadError::InvalidParam {
        name,
        reason: reason.into(),
    }
}
