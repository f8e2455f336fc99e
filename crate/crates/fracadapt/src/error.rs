//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-invertible series: leading coefficient is zero")]
    NonInvertibleSeries,

    #[error("singular basis Gram matrix at order L={order} (rcond={rcond:.3e})")]
    SingularBasis { order: usize, rcond: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("degenerate design: {0}")]
    DesignDegenerate(String),

    #[error("invalid restriction: {0}")]
    InvalidRestriction(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("Monte Carlo cell failed: {0}")]
    CellFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
