use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment of order {order} does not exist for tail index alpha = {alpha}")]
    MomentDoesNotExist { order: f64, alpha: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The closed form cannot be evaluated reliably in double precision.
    #[error("numerical overflow evaluating order statistic for n = {n}, s = {s}: {reason}")]
    Overflow { n: u32, s: u32, reason: String },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error}, target {target}")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        target: f64,
    },

    /// No closed form exists for this cell; use Monte Carlo or the bounds.
    #[error("no closed form for {cell} at k = {k}")]
    NoClosedForm { cell: String, k: u32 },

    #[error("method unavailable: {0}")]
    MethodUnavailable(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that mean "try another evaluation method" rather than
    /// "the inputs are wrong".
    pub fn is_method_unavailable(&self) -> bool {
        matches!(
            self,
            Error::NoClosedForm { .. } | Error::Overflow { .. } | Error::MethodUnavailable(_)
        )
    }
}
