//! Adaptive (and fully parametric) estimation of stationary and
//! nonstationary fractional time-series models with generalized-polynomial
//! trends: simulation, root-n-consistent initial estimation (CSS and tapered
//! Whittle), series estimation of the innovation score, one-step efficient
//! updates with covariance estimates and Wald tests, and a reproducible
//! Monte Carlo harness for relative-efficiency tables.
//!
//! Module map:
//! - [`fracfilter`]: truncated power-series algebra (scalar-generic core).
//! - [`model`]: FARIMA specification, AR-representation and derivative
//!   filters, type-II simulation, autocovariance oracle.
//! - [`innovations`]: the five innovation distributions with their scores
//!   and Fisher informations.
//! - [`residuals`]: trend regressors, truncated-AR residuals, analytic
//!   residual derivatives.
//! - [`initial`]: CSS and cosine-bell tapered Whittle initial estimates.
//! - [`score`]: series (projection) score estimation.
//! - [`adapt`]: one-step adaptive/parametric updates, covariances, trend
//!   rate normalization, Wald tests.
//! - [`families`]: parametric innovation families for the parametric step.
//! - [`mc`]: seeded, thread-count-independent Monte Carlo harness.

pub mod adapt;
pub mod error;
pub mod families;
pub mod fracfilter;
pub mod initial;
pub mod innovations;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod optim;
pub mod quad;
pub mod residuals;
pub mod scalar;
pub mod score;
pub mod special;

pub use error::{Error, Result};

/// Filter coefficients in double precision (the working type of the
/// estimation stack).
pub type FilterCoeffs64 = fracfilter::FilterCoeffs<f64>;

/// Filter coefficients in single precision.
pub type FilterCoeffs32 = fracfilter::FilterCoeffs<f32>;
