use thiserror::Error;

/// Errors raised across the library. Numerical failure reports are kept
/// distinct from input validation so the CLI can map them to different
/// exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("integration failure at x = {x} (lambda = {lambda})")]
    IntegrationFailure { x: f64, lambda: String },

    #[error("resolution failure: {0}")]
    ResolutionFailure(String),

    #[error("probe failure: {0}")]
    ProbeFailure(String),

    #[error("truncation dominates the Floquet sum at tau = {tau}")]
    TruncationDominated { tau: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("construction failure: {0}")]
    ConstructionFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for numerical failure reports (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationFailure { .. }
                | Error::ResolutionFailure(_)
                | Error::ProbeFailure(_)
                | Error::TruncationDominated { .. }
                | Error::NonConvergence(_)
                | Error::ConstructionFailure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
