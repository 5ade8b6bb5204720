use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid family definition: {0}")]
    InvalidFamily(String),

    #[error("series did not converge: {what} (stopped at n = {reached})")]
    NonConvergent { what: String, reached: u64 },

    #[error("all coefficients vanish; the state cannot be normalized")]
    DegenerateState,

    #[error("divergent moment: {what}")]
    DivergentMoment { what: String },

    #[error("quadrature tolerance not met: estimate {estimate:e} > {tolerance:e} after {evaluations} evaluations")]
    ToleranceNotMet {
        estimate: f64,
        tolerance: f64,
        evaluations: u64,
    },

    #[error("uncertainty product below {epsilon} not attained; infimum {best_product} observed at alpha = {best_alpha}")]
    NotAttainable {
        epsilon: f64,
        best_product: f64,
        best_alpha: f64,
    },

    #[error("no sign change of product - {target} on [{lo}, {hi}]")]
    NoBracket { target: f64, lo: f64, hi: f64 },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidFamily(e.to_string())
    }
}
