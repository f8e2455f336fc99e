//! Parametric innovation families for the fully parametric one-step
//! estimator: unit-variance densities g(s; theta3) with analytic scores.

use std::f64::consts::PI;

use crate::adapt::ParametricFamily;
use crate::error::{Error, Result};
use crate::special::{digamma, ln_gamma};

/// Standard normal innovations (no free density parameter).
pub struct GaussianFamily;

impl ParametricFamily for GaussianFamily {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn dim(&self) -> usize {
        0
    }

    fn start(&self) -> Vec<f64> {
        Vec::new()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    fn log_density(&self, s: f64, _t3: &[f64]) -> f64 {
        -0.5 * s * s - 0.5 * (2.0 * PI).ln()
    }

    fn score(&self, s: f64, _t3: &[f64]) -> f64 {
        s
    }

    fn dlog_dtheta(&self, _s: f64, _t3: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// Unit-variance Laplace innovations (no free density parameter).
pub struct LaplaceFamily;

impl ParametricFamily for LaplaceFamily {
    fn name(&self) -> &'static str {
        "laplace"
    }

    fn dim(&self) -> usize {
        0
    }

    fn start(&self) -> Vec<f64> {
        Vec::new()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    fn log_density(&self, s: f64, _t3: &[f64]) -> f64 {
        -std::f64::consts::SQRT_2 * s.abs() - 0.5 * 2.0f64.ln()
    }

    fn score(&self, s: f64, _t3: &[f64]) -> f64 {
        if s == 0.0 {
            0.0
        } else {
            std::f64::consts::SQRT_2 * s.signum()
        }
    }

    fn dlog_dtheta(&self, _s: f64, _t3: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// Student t innovations scaled to unit variance, with the degrees of
/// freedom as the free density parameter (kept above 2 so the scaling
/// exists).
pub struct StudentTFamily;

impl ParametricFamily for StudentTFamily {
    fn name(&self) -> &'static str {
        "t"
    }

    fn dim(&self) -> usize {
        1
    }

    fn start(&self) -> Vec<f64> {
        vec![8.0]
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(2.2, 100.0)]
    }

    fn log_density(&self, s: f64, t3: &[f64]) -> f64 {
        let nu = t3[0];
        ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln()
            + 0.5 * (nu / (nu - 2.0)).ln()
            - 0.5 * (nu + 1.0) * (1.0 + s * s / (nu - 2.0)).ln()
    }

    fn score(&self, s: f64, t3: &[f64]) -> f64 {
        let nu = t3[0];
        (nu + 1.0) * s / ((nu - 2.0) + s * s)
    }

    fn dlog_dtheta(&self, s: f64, t3: &[f64]) -> Vec<f64> {
        let nu = t3[0];
        let q = 1.0 + s * s / (nu - 2.0);
        vec![
            0.5 * (digamma(0.5 * (nu + 1.0)) - digamma(0.5 * nu)) - 0.5 / (nu - 2.0)
                - 0.5 * q.ln()
                + 0.5 * (nu + 1.0) * s * s / ((nu - 2.0) * ((nu - 2.0) + s * s)),
        ]
    }
}

/// Family lookup for the CLI.
pub fn family_by_name(name: &str) -> Result<Box<dyn ParametricFamily>> {
    match name {
        "gaussian" => Ok(Box::new(GaussianFamily)),
        "laplace" => Ok(Box::new(LaplaceFamily)),
        "t" => Ok(Box::new(StudentTFamily)),
        other => Err(Error::InvalidFamily(format!(
            "unknown parametric family '{other}' (expected gaussian|laplace|t)"
        ))),
    }
}
