use num_complex::Complex64;
use thiserror::Error;

use crate::freeconv::SDState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// A dense spectral routine failed to converge.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// `Re(1 + 4 rho^2 G^2) <= 0` was met on the continuation path while the
    /// principal square-root branch was required.
    #[error("branch violation at z1 = {at}: certificate {certificate:.3e}")]
    Branch {
        at: Complex64,
        certificate: f64,
        last_good: Box<SDState>,
    },

    #[error("solver did not converge at z1 = {at} (residual {residual:.3e})")]
    Convergence { at: Complex64, residual: f64 },

    #[error("series diverges: gamma * s = {0} >= 1")]
    Divergence(f64),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of numerical routines, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NumericFailure(_)
                | Error::Branch { .. }
                | Error::Convergence { .. }
                | Error::Divergence(_)
                | Error::Resolution(_)
        )
    }
}
