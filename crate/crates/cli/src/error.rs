use hybrid_ins::Error;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Malformed scenario, configuration or data file.
    pub const INPUT: i32 = 2;
    /// The run diverged (estimate blow-up, Riccati loss of definiteness,
    /// jump cycle).
    pub const DIVERGENCE: i32 = 3;
    /// The landmark geometry is outside what the hybrid observer supports.
    pub const UNSUPPORTED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Input(_) | CliError::Io { .. } => exit::INPUT,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_) | Error::InsufficientLandmarks { .. } => exit::INPUT,
                Error::CollinearLandmarks | Error::ConfigurationUnsupported(_) => exit::UNSUPPORTED,
                Error::RiccatiDivergence { .. } | Error::JumpCycle { .. } | Error::Divergence { .. } => exit::DIVERGENCE,
            },
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
