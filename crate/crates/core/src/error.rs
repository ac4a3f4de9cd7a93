use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of L(s, chi) at s = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    /// Requested tolerance could not be met within the term budget.
    #[error("precision error: achieved bound {achieved:e} exceeds requested {requested:e}")]
    Precision { achieved: f64, requested: f64 },

    #[error("height {height} exceeds the evaluation cap {cap}")]
    HeightCap { height: f64, cap: f64 },

    #[error("singular Euler factor at p = {prime}")]
    SingularFactor { prime: u64 },

    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    #[error("quadrature step too coarse: phase change {phase_change:.3} per step at t = {at}, use a step below {suggested:e}")]
    Accuracy {
        at: f64,
        phase_change: f64,
        suggested: f64,
    },

    #[error("factorization of {0} needs a prime factor above the trial-division limit")]
    Factorization(u64),

    #[error("rejected shift families: {0}")]
    Rejected(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Whether the failure is numerical (as opposed to a bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Precision { .. } | Error::Accuracy { .. } | Error::SingularFactor { .. }
        )
    }
}
