use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient landmarks: {found} given, at least 3 are required")]
    InsufficientLandmarks { found: usize },
    #[error("collinear landmarks: the weighted scatter matrix has fewer than two nonzero eigenvalues")]
    CollinearLandmarks,
    #[error("configuration unsupported: {0}")]
    ConfigurationUnsupported(String),
    #[error("Riccati solution lost positive definiteness at t = {t}")]
    RiccatiDivergence { t: f64 },
    #[error("jump cycle at t = {t}: more than {limit} consecutive jumps")]
    JumpCycle { t: f64, limit: usize },
    #[error("estimate diverged at t = {t}: {what}")]
    Divergence { t: f64, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
