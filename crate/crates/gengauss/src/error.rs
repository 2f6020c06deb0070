use thiserror::Error;

/// Errors raised by the library.
///
/// The variants fall into three families that the command-line front end maps
/// to distinct exit codes: malformed input, unmet hypotheses, and solver failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unbounded body: {0}")]
    UnboundedBody(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("step too large: {0}")]
    StepTooLarge(String),

    #[error("out of support: {0}")]
    OutOfSupport(String),

    #[error("convexity lost: {0}")]
    Convexity(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("continuation failed at t = {last_t}: {reason}")]
    Continuation { last_t: f64, reason: String },

    #[error("inconsistent multiplier: {0}")]
    InconsistentMultiplier(String),

    #[error("branch collapse: {0}")]
    BranchCollapse(String),
}

impl Error {
    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_) | Error::Shape(_) | Error::StepTooLarge(_) => ErrorKind::Input,
            Error::UnboundedBody(_) | Error::Precondition(_) => ErrorKind::Precondition,
            Error::OutOfSupport(_)
            | Error::Convexity(_)
            | Error::NonConvergence(_)
            | Error::Continuation { .. }
            | Error::InconsistentMultiplier(_)
            | Error::BranchCollapse(_) => ErrorKind::Solver,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Precondition,
    Solver,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
