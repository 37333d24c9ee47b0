use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular or ill-conditioned (condition estimate {estimate:.3e})")]
    Singular { estimate: f64 },

    #[error("QR iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("eigendecomposition residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("too close to an exceptional point: {context} (eigenvector condition {condition:.3e})")]
    NearExceptionalPoint { condition: f64, context: String },

    #[error("matrix norm {norm:.3e} too large to exponentiate; use a smaller time step")]
    Magnitude { norm: f64 },

    #[error("ambiguous branch match at grid point {index} (t = {time})")]
    BranchAmbiguity { index: usize, time: f64 },

    #[error("end-point fastest growing state is indeterminate (window fraction down to {y})")]
    IndeterminateEndpoint { y: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Failures caused by the physics of the requested run rather than by
    /// malformed input.
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::NearExceptionalPoint { .. }
                | Error::IndeterminateEndpoint { .. }
                | Error::BranchAmbiguity { .. }
                | Error::NoConvergence { .. }
                | Error::Residual { .. }
                | Error::Singular { .. }
                | Error::Magnitude { .. }
        )
    }
}

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
