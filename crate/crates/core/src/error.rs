use thiserror::Error;

/// Errors raised by the model, the integrator and the analysis routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("kernel violation at t = {t}: normalizer h(t) = {h} is not positive")]
    KernelViolation { t: f64, h: f64 },

    #[error("history underflow: requested s = {s} precedes the earliest stored time {earliest}")]
    HistoryUnderflow { s: f64, earliest: f64 },

    #[error("time {s} is outside the trajectory range [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },

    #[error("certificate violation: {0}")]
    CertificateViolation(String),

    #[error("series value {value} at t = {t} is not positive")]
    NonPositiveSeries { t: f64, value: f64 },

    #[error("solution became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical scheme itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::KernelViolation { .. }
                | Error::HistoryUnderflow { .. }
                | Error::OutOfRange { .. }
                | Error::NonPositiveSeries { .. }
                | Error::NonFinite { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
