use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pole in {context}: denominator magnitude {magnitude:e} is below 1e-30")]
    Pole { context: &'static str, magnitude: f64 },

    #[error("weak-signal condition violated: |omega_b| = {omega_b:e} exceeds |omega_c|/5 = {limit:e} rad/s")]
    Validity { omega_b: f64, limit: f64 },

    #[error("Liouvillian stationary space has dimension {null_dim}, expected 1")]
    SingularLiouvillian { null_dim: usize },

    #[error("quadrature did not converge: error estimate {error:e} above tolerance {tolerance:e} after {subdivisions} subdivisions")]
    QuadratureFailure {
        error: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("scan has no interior resonance: {0}")]
    NoDip(&'static str),

    #[error("half-maximum level crossed {crossings} times, expected 2")]
    Ambiguous { crossings: usize },

    #[error("{quantity} = {value} is outside the valid range [{min}, {max}]")]
    Range {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("fit did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),

    #[error("rank-deficient design: {0}")]
    RankDeficient(&'static str),

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
