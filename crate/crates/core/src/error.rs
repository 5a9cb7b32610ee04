use thiserror::Error;

/// Errors raised by the numerical kernels and the model builders.
///
/// The CLI maps [`Error::is_parameter`] failures to exit code 2 and every
/// other variant to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure: {message} (best bracket [{lo}, {hi}])")]
    Numerical { message: String, lo: f64, hi: f64 },

    #[error("degenerate eigenvalue bracket around {eigenvalue}: {count} eigenvalues within tolerance")]
    Degeneracy { eigenvalue: f64, count: usize },

    #[error("factorization breakdown at shift {shift} after {retries} retries")]
    Breakdown { shift: f64, retries: usize },

    #[error("truncation domain too small: potential at ±{length} is {potential}, need ≥ {required}; try L = {suggested}")]
    DomainTooSmall {
        length: f64,
        potential: f64,
        required: f64,
        suggested: f64,
    },

    #[error("no solution: target {target} is below the band minimum {minimum}")]
    NoSolution { target: f64, minimum: f64 },

    #[error("gauge error: {0}")]
    Gauge(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("grid policy violation: {message}; need at least {required_nodes} nodes per axis")]
    GridPolicy {
        message: String,
        required_nodes: usize,
    },

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_parameter(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_)
                | Error::DomainTooSmall { .. }
                | Error::NoSolution { .. }
                | Error::Gauge(_)
                | Error::Resolution(_)
                | Error::GridPolicy { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
