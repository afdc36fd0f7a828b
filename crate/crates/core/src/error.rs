use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("alpha is not a strict contraction (largest singular value {sigma_max})")]
    ContractionViolation { sigma_max: f64 },

    #[error("upper-right block of scattering event {event:?} is numerically singular (smallest singular value {sigma_min:e})")]
    SingularBlock { event: Option<i64>, sigma_min: f64 },

    #[error("defect operator not invertible (eigenvalue {eigenvalue:e} below floor)")]
    DefectInversion { eigenvalue: f64 },

    #[error("cocycle left the Lorentz group at step {step}: residual {residual:e}")]
    LorentzDrift { step: usize, residual: f64 },

    #[error("numeric failure at step {step}: {what}")]
    NumericFailure { step: usize, what: String },

    #[error("bracket closure did not stabilize (last dimensions {previous} -> {last})")]
    NonConvergence { previous: usize, last: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
