use thiserror::Error;

/// Errors raised by the solver, the queue model and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("CFL condition violated: P_max*dt/dE = {cfl} exceeds 1")]
    Cfl { cfl: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("upwind step produced negative density {value:e} at energy index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("degenerate Markov chain: drain probability (1-p_a)(1-p_b)p_s is zero")]
    DegenerateChain,

    #[error("infinite expected service time: throughput is zero")]
    ZeroThroughput,

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
