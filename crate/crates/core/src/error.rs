use thiserror::Error;

/// Errors produced by the solver and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An index relation required by an estimate is violated; the message
    /// names the violated constraint.
    #[error("index constraint violated: {0}")]
    IndexConstraint(String),

    #[error("input is not supported in dyadic band {j}")]
    NotBandLimited { j: i32 },

    #[error("blow-up at t = {t}: max |omega| = {omega_max}")]
    BlowUp { t: f64, omega_max: f64 },

    #[error("time step underflow (dt = {dt:e})")]
    TimeStepUnderflow { dt: f64 },

    #[error("snapshots are not uniformly spaced in time")]
    NonUniformSpacing,

    #[error("C(beta) calibration failed: relative residual {residual:e} exceeds {threshold:e}")]
    CalibrationFailed { residual: f64, threshold: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config line {line}, key `{key}`: {msg}")]
    Config { line: usize, key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
