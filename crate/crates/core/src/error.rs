use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid field specification: {0}")]
    InvalidSpec(String),
    #[error("ellipticity violation: {0}")]
    EllipticityViolation(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("singular tridiagonal system (zero pivot at row {row})")]
    SingularMatrix { row: usize },
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("gamma = {gamma} is not above the principal value: {reason}")]
    GammaBelowPrincipal { gamma: f64, reason: String },
    #[error("non-positive Wronskian (min {0:e})")]
    NonPositiveWronskian(f64),
    #[error("empty trust region: {0}")]
    EmptyTrustRegion(String),
    #[error("empty tube: {0}")]
    EmptyTube(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

impl Error {
    /// Stable identifier used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::EllipticityViolation(_) => "EllipticityViolation",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NonConvergence(_) => "NonConvergence",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::DomainTooSmall(_) => "DomainTooSmall",
            Error::GammaBelowPrincipal { .. } => "GammaBelowPrincipal",
            Error::NonPositiveWronskian(_) => "NonPositiveWronskian",
            Error::EmptyTrustRegion(_) => "EmptyTrustRegion",
            Error::EmptyTube(_) => "EmptyTube",
            Error::DegenerateSample(_) => "DegenerateSample",
        }
    }

    /// True for errors caused by the inputs rather than by a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::EllipticityViolation(_)
                | Error::InvalidGrid(_)
                | Error::InvalidArgument(_)
        )
    }
}
