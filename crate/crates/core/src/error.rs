use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge (residual {residual:e})")]
    Convergence { what: &'static str, residual: f64 },

    #[error("integrator failure at t = {t:e} s: {reason}")]
    IntegratorFailure { t: f64, reason: String },

    #[error("frequency grid too coarse: spacing {spacing:e} rad/s exceeds {required:e} rad/s")]
    Resolution { spacing: f64, required: f64 },

    #[error("drive amplitude {epsilon:e} rad/s exceeds the weak-drive limit {limit:e} rad/s")]
    WeakDrive { epsilon: f64, limit: f64 },

    #[error("weak-drive check failed: halving the drive changed g2 by {deviation:e} (relative)")]
    WeakDriveSensitivity { deviation: f64 },

    #[error("emission window tail of {tail:e} s truncates {missing:e} photons")]
    TailTruncation { tail: f64, missing: f64 },

    #[error("no photons emitted (expected photon number {0:e}); pulse-wise g2 is undefined")]
    ZeroPhotons(f64),

    #[error("insufficient span: {0}")]
    InsufficientSpan(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
