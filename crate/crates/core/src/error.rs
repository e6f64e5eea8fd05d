use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A normalizing maximum or integral vanished.
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    /// A moment that must be finite is infinite for the chosen kernel.
    #[error("non-integrable: {0}")]
    NonIntegrable(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short class name used in CLI diagnostics.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Parse(_) => "ParseError",
            Error::Domain(_) => "DomainError",
            Error::ZeroDenominator(_) => "ZeroDenominator",
            Error::NonIntegrable(_) => "NonIntegrable",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::Io(_) => "IoError",
        }
    }
}
