use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the library.
///
/// The variants fall into three groups that the command-line front end maps
/// to distinct exit codes: input validation, mathematical condition
/// violations (the hypotheses of an asymptotic formula fail) and numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at z = {0}")]
    PoleOfGamma(Complex64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("condition violated: {0}")]
    ConditionViolation(String),

    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("singular point: {what} at tau = {tau}")]
    Singularity { what: &'static str, tau: Complex64 },

    #[error("singular matrix in {0}")]
    SingularMatrix(&'static str),

    #[error("integration failed near tau = {tau}: {reason}")]
    IntegrationFailure { tau: Complex64, reason: String },

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("ladder breakdown at n = {n}: {reason}")]
    LadderBreakdown { n: i64, reason: String },

    #[error("division by zero in lattice residual at n = {0}")]
    LatticeDivision(i64),

    #[error("sampling exhausted after {attempts} attempts ({accepted} of {requested} accepted)")]
    RejectionExhausted {
        attempts: usize,
        accepted: usize,
        requested: usize,
    },
}

impl Error {
    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameters(_) => ErrorKind::Validation,
            Error::PoleOfGamma(_)
            | Error::ConditionViolation(_)
            | Error::DegenerateChart(_)
            | Error::SingularMatrix(_)
            | Error::Singularity { .. }
            | Error::LatticeDivision(_)
            | Error::LadderBreakdown { .. }
            | Error::RejectionExhausted { .. } => ErrorKind::Condition,
            Error::IntegrationFailure { .. } | Error::NonConvergence(_) => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Condition,
    Numerical,
}

pub type Result<T> = std::result::Result<T, Error>;
