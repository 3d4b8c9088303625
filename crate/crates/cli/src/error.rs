use ruelle_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("rerun differs from the manifest in {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// Process exit code, one per error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Manifest(_) => 3,
            CliError::Core(e) => match e {
                Error::Shape { .. } | Error::NonBinary { .. } => 10,
                Error::ZeroRowOrColumn { .. } => 11,
                Error::ReducibleMatrix { .. } | Error::PeriodicMatrix { .. } => 12,
                Error::InadmissibleWord { .. }
                | Error::InadmissiblePoint { .. }
                | Error::MissingWord { .. }
                | Error::TableSize { .. }
                | Error::NonPositiveRoof { .. } => 13,
                Error::InvalidParameter(_) | Error::DomainError(_) | Error::DepthMismatch { .. } | Error::DimensionMismatch { .. } => 14,
                Error::NonPrimitive
                | Error::NoConvergence { .. }
                | Error::BracketFailure { .. }
                | Error::EigenvalueCollision { .. } => 20,
                Error::DivergentOnCircle { .. } | Error::PoleNotIsolated { .. } => 21,
                Error::EnumerationBudgetExceeded { .. } => 22,
                Error::HorizonTooSmall { .. } | Error::EmptyWindow { .. } => 23,
                Error::ConeViolation { .. } | Error::NonPositive { .. } => 24,
            },
            CliError::Io { .. } => 30,
            CliError::Mismatch(_) => 31,
        }
    }
}
