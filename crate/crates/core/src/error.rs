use thiserror::Error;

use crate::distributions::TailKind;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The probability lies outside the regime in which an asymptotic
    /// formula is real-valued (or outside (0, 1) altogether).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{dist} has no derived {side:?} tail model")]
    UnsupportedTail { dist: String, side: TailKind },

    #[error("x = {x} is outside the support of {dist}")]
    Support { dist: String, x: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    /// The requested probability is below the smallest positive binary64
    /// value; use the log-space entry points instead.
    #[error("probability underflows binary64 (log value {log_value})")]
    Underflow { log_value: f64 },

    #[error("could not bracket the quantile for tail mass exp({ln_target}) after {widenings} widenings")]
    BracketFailure { ln_target: f64, widenings: usize },

    #[error("root finder stopped at x = {x} with residual {residual:e} (tolerance {tol:e})")]
    NotConverged { x: f64, residual: f64, tol: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A baseline approximant evaluated outside its published validity range.
    #[error("{name} baseline is only valid for {lo:e} < u < {hi}; got u = {u:e}")]
    OutOfRange { name: &'static str, u: f64, lo: f64, hi: f64 },

    #[error("{failed} of {total} rows failed (limit 20%)")]
    TooManyFailures { failed: usize, total: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures of the numerical reference (quadrature or root finding).
    pub fn is_oracle_failure(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure(_)
                | Error::Underflow { .. }
                | Error::BracketFailure { .. }
                | Error::NotConverged { .. }
        )
    }
}
