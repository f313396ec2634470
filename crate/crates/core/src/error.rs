use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The spectrum is singular at the requested wavenumber.
    #[error("spectrum is singular at k = {k}")]
    Singularity { k: f64 },

    #[error(
        "quadrature did not converge on [{lo}, {hi}]: estimate {estimate:e}, \
         error {error:e} after {intervals} subintervals"
    )]
    Quadrature { lo: f64, hi: f64, estimate: f64, error: f64, intervals: usize },

    /// A statistic is undefined for the supplied data (e.g. zero variance).
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("malformed screen file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
