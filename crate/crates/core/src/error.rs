use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("integration diverged at step {step}")]
    Divergence { step: usize },

    #[error("reservoir unstable at step {step} (epsilon_f = {epsilon_f:?})")]
    Unstable { step: usize, epsilon_f: Option<f64> },

    #[error("input too short: need {needed} samples, got {got}")]
    InputLength { needed: usize, got: usize },

    #[error("requested {requested} edges but only {available} are available")]
    Capacity { requested: usize, available: usize },

    #[error("could not build a connected network after {attempts} attempts")]
    Construction { attempts: usize },

    #[error("spectral normalization undefined: all eigenvalue real parts vanish")]
    NormalizationUndefined,

    #[error("brute-force enumeration limited to {limit} nodes, got {size}")]
    TooLarge { size: usize, limit: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by an invalid request rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::DimensionMismatch(_)
                | Error::InputLength { .. }
                | Error::Capacity { .. }
                | Error::TooLarge { .. }
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
