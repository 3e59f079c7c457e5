use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precision exhausted at {digits} digits: cancellation consumed {lost_digits:.1} digits")]
    PrecisionExhausted { digits: u32, lost_digits: f64 },

    #[error("escalation ceiling of {ceiling} digits reached while evaluating {what}")]
    EscalationCeiling { what: String, ceiling: u32 },

    #[error("derivative order {order} exceeds the configured ceiling {ceiling}")]
    DerivativeCeiling { order: usize, ceiling: usize },

    #[error("quadrature did not converge after {levels} levels (last difference {last_diff})")]
    QuadratureNonConvergence { levels: u32, last_diff: String },

    #[error("series tail {tail} is not below the tolerance {tol}")]
    TailTooLarge { tail: String, tol: String },

    #[error("peak bracket failure: {0}")]
    BracketFailure(String),

    #[error("no cumulant order up to {m_cap} makes the order-{r} scan sign-regular")]
    NotFound { r: usize, m_cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corrupt cache file: {0}")]
    CorruptCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
