use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "truncation at dimension {dim} is insufficient: tail mass {tail:.3e} exceeds {tol:.1e}"
    )]
    TruncationInsufficient { dim: usize, tail: f64, tol: f64 },

    #[error("probability leaked out of the truncated space: {leakage:.3e} exceeds {tol:.1e}")]
    Leakage { leakage: f64, tol: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("heralding event has zero probability")]
    ZeroProbability,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state has nonzero first moments (max |<q>| = {max_mean:.3e})")]
    Displaced { max_mean: f64 },

    #[error("entropy of entanglement is undefined for mixed states (purity {purity:.6})")]
    MixedState { purity: f64 },

    #[error("maximum-likelihood reconstruction did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("internal consistency check failed: {what} = {value:.3e}")]
    Consistency { what: &'static str, value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::TruncationInsufficient { .. } => "truncation_insufficient",
            Error::Leakage { .. } => "leakage",
            Error::ZeroNorm => "zero_norm",
            Error::ZeroProbability => "zero_probability",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::Displaced { .. } => "displaced",
            Error::MixedState { .. } => "mixed_state",
            Error::NotConverged { .. } => "not_converged",
            Error::Consistency { .. } => "consistency",
            Error::Config(_) => "config",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
