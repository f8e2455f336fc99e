//! Root-n-consistent initial estimates: a conditional-sum-of-squares grid
//! estimator and a cosine-bell-tapered discrete Whittle estimator.
//!
//! Both profile the memory order over a bounded grid (default [-0.4, 1.75],
//! step 0.01) with a golden-section refinement inside the best cell; the
//! short-memory block is handled by Nelder-Mead started from zero, and the
//! trend block by least squares on the filtered, mean-centered regressors
//! (linear given the rest).

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fracfilter::apply_filter;
use crate::linalg;
use crate::model::{ar_coeffs, ModelSpec, Params};
use crate::optim::{golden_section, nelder_mead};
use crate::residuals::RegressionDesign;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialMethod {
    Css,
    TaperedWhittle,
}

impl InitialMethod {
    pub fn name(&self) -> &'static str {
        match self {
            InitialMethod::Css => "css",
            InitialMethod::TaperedWhittle => "whittle",
        }
    }
}

impl FromStr for InitialMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "css" => Ok(InitialMethod::Css),
            "whittle" => Ok(InitialMethod::TaperedWhittle),
            other => Err(Error::invalid(format!(
                "unknown initial estimator '{other}' (expected css|whittle)"
            ))),
        }
    }
}

/// Search grid for the memory order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { lo: -0.4, hi: 1.75, step: 0.01 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !(self.step > 0.0) {
            return Err(Error::invalid("grid requires lo < hi and step > 0"));
        }
        Ok(())
    }
}

/// Result of an initial fit.
#[derive(Debug, Clone)]
pub struct InitialFit {
    /// Estimated parameter point (memory, short, trend, noise variance).
    pub params: Params,
    /// Minimized objective value.
    pub objective: f64,
    pub method: InitialMethod,
    /// Set when the memory estimate landed on a grid boundary.
    pub hit_boundary: bool,
}

const BOUNDARY_TOL: f64 = 1e-9;

fn check_series(y: &[f64]) -> Result<()> {
    if y.len() < 8 {
        return Err(Error::DegenerateData(format!(
            "series too short for estimation (n = {})",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("series contains non-finite values".into()));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::DegenerateData("series is constant".into()));
    }
    Ok(())
}

/// Filtered least squares of the trend block: regress the filtered,
/// mean-centered series on the filtered, mean-centered trend regressors.
/// Returns (theta2, mean sum of squared centered residuals).
fn filtered_trend_ls(
    xi: f64,
    nu: &[f64],
    y: &[f64],
    design: &RegressionDesign,
    spec: &ModelSpec,
) -> Result<(Vec<f64>, f64)> {
    let n = y.len();
    let alpha = ar_coeffs(xi, nu, spec, n)?;
    let center = |mut v: Vec<f64>| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= m);
        v
    };
    let fy = center(apply_filter(&alpha, y)?);
    let p2 = design.p2();
    if p2 == 0 {
        let ss = fy.iter().map(|v| v * v).sum::<f64>() / n as f64;
        return Ok((Vec::new(), ss));
    }
    let fz: Vec<Vec<f64>> = design
        .z2_columns(n)
        .into_iter()
        .map(|col| Ok(center(apply_filter(&alpha, &col)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut gram = vec![0.0; p2 * p2];
    let mut rhs = vec![0.0; p2];
    for i in 0..p2 {
        for j in 0..=i {
            let g = linalg::dot(&fz[i], &fz[j]);
            gram[i * p2 + j] = g;
            gram[j * p2 + i] = g;
        }
        rhs[i] = linalg::dot(&fz[i], &fy);
    }
    let theta2 = linalg::solve_spd(&gram, p2, &rhs).ok_or_else(|| {
        Error::DesignDegenerate("filtered trend regressors are collinear".into())
    })?;
    let mut ss = 0.0;
    for t in 0..n {
        let mut r = fy[t];
        for j in 0..p2 {
            r -= theta2[j] * fz[j][t];
        }
        ss += r * r;
    }
    Ok((theta2, ss / n as f64))
}

/// Objective value for the CSS criterion at (xi, nu), with the trend block
/// profiled out; +inf when the short-memory point is inadmissible.
fn css_profile(
    xi: f64,
    nu: &[f64],
    y: &[f64],
    design: &RegressionDesign,
    spec: &ModelSpec,
) -> f64 {
    if spec.with_short(nu).and_then(|s| s.validate()).is_err() {
        return f64::INFINITY;
    }
    match filtered_trend_ls(xi, nu, y, design, spec) {
        Ok((_, ss)) if ss.is_finite() => ss,
        _ => f64::INFINITY,
    }
}

/// Minimize `inner(xi)` over the grid with golden-section refinement in the
/// winning cell. Sequential ascending evaluation with a strict comparison
/// makes the smallest memory order win exact ties.
fn minimize_memory<F: FnMut(f64) -> f64>(mut inner: F, grid: &GridSpec) -> Result<(f64, f64, bool)> {
    grid.validate()?;
    let mut points = Vec::new();
    let mut k = 0usize;
    loop {
        let xi = grid.lo + k as f64 * grid.step;
        if xi > grid.hi + 1e-12 {
            break;
        }
        points.push(xi.min(grid.hi));
        k += 1;
    }
    if *points.last().unwrap() < grid.hi - 1e-12 {
        points.push(grid.hi);
    }

    let mut best_xi = f64::NAN;
    let mut best_obj = f64::INFINITY;
    for &xi in &points {
        let obj = inner(xi);
        if obj < best_obj {
            best_obj = obj;
            best_xi = xi;
        }
    }
    if !best_obj.is_finite() {
        return Err(Error::EstimationFailed(
            "objective non-finite at every grid point".into(),
        ));
    }

    let lo = (best_xi - grid.step).max(grid.lo);
    let hi = (best_xi + grid.step).min(grid.hi);
    let (xi_ref, obj_ref) = golden_section(&mut inner, lo, hi, 1e-7, 120);
    let (xi_hat, obj_hat) = if obj_ref < best_obj {
        (xi_ref, obj_ref)
    } else {
        (best_xi, best_obj)
    };
    let hit = xi_hat <= grid.lo + BOUNDARY_TOL || xi_hat >= grid.hi - BOUNDARY_TOL;
    Ok((xi_hat, obj_hat, hit))
}

/// Inner minimization over the short-memory block at fixed xi.
fn short_profile<F: Fn(f64, &[f64]) -> f64>(objective: &F, xi: f64, p: usize) -> (Vec<f64>, f64) {
    if p == 0 {
        return (Vec::new(), objective(xi, &[]));
    }
    let (nu, obj) = nelder_mead(|nu| objective(xi, nu), &vec![0.0; p], 0.2, 1e-9, 600);
    (nu, obj)
}

/// Conditional-sum-of-squares estimate: minimizes the mean squared
/// mean-corrected residual over (xi, nu, theta2).
pub fn css_fit(
    y: &[f64],
    design: &RegressionDesign,
    spec: &ModelSpec,
    grid: &GridSpec,
) -> Result<InitialFit> {
    check_series(y)?;
    let p = spec.short_len();
    let objective = |xi: f64, nu: &[f64]| css_profile(xi, nu, y, design, spec);

    let (xi, _, hit) = minimize_memory(|xi| short_profile(&objective, xi, p).1, grid)?;
    let (nu, obj) = short_profile(&objective, xi, p);
    let (theta2, sigma2) = filtered_trend_ls(xi, &nu, y, design, spec)?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::EstimationFailed(format!(
            "CSS variance estimate {sigma2} is not positive"
        )));
    }
    Ok(InitialFit {
        params: Params::new(xi, nu, theta2, sigma2),
        objective: obj,
        method: InitialMethod::Css,
        hit_boundary: hit,
    })
}

/// Cosine-bell taper weights h_t = (1 - cos(2 pi t / n)) / 2, t = 1..n.
pub fn cosine_bell(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|t| 0.5 * (1.0 - (2.0 * PI * t as f64 / n as f64).cos()))
        .collect()
}

/// Tapered periodogram of `y` at the skipped Fourier frequencies
/// lambda_j = 2 pi j / n, j = k, 2k, ... <= (n-1)/2 for skip factor k. The
/// default skip of 2 steps past the +-1 spectral support of the cosine-bell
/// window, where neighbouring tapered ordinates are strongly correlated.
/// Normalized so that E I(lambda) approximates the spectral density.
pub struct TaperedPeriodogram {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn tapered_periodogram(y: &[f64], skip: usize) -> Result<TaperedPeriodogram> {
    let n = y.len();
    if skip == 0 {
        return Err(Error::invalid("frequency skip must be positive"));
    }
    let h = cosine_bell(n);
    let denom: f64 = h.iter().map(|v| v * v).sum();
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    let mut j = skip;
    while 2 * j <= n - 1 {
        let lam = 2.0 * PI * j as f64 / n as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (t, (&ht, &yt)) in h.iter().zip(y).enumerate() {
            let arg = lam * (t + 1) as f64;
            re += ht * yt * arg.cos();
            im += ht * yt * arg.sin();
        }
        freqs.push(lam);
        values.push((re * re + im * im) / (2.0 * PI * denom));
        j += skip;
    }
    if freqs.is_empty() {
        return Err(Error::invalid(
            "no usable Fourier frequencies; increase n or reduce the taper order",
        ));
    }
    Ok(TaperedPeriodogram { freqs, values })
}

/// log |poly(e^{i lam})|^2 for 1 -/+ coefficient polynomials.
fn transfer_log_mod2(coeffs: &[f64], negate: bool, lam: f64) -> f64 {
    let mut re = 1.0;
    let mut im = 0.0;
    for (k, &c) in coeffs.iter().enumerate() {
        let c = if negate { -c } else { c };
        let arg = lam * (k + 1) as f64;
        re += c * arg.cos();
        im += c * arg.sin();
    }
    (re * re + im * im).ln()
}

/// log k(lambda; xi, nu) with k = |1 - e^{i lam}|^{-2 xi} |MA|^2 / |AR|^2.
fn log_spectral_shape(lam: f64, xi: f64, spec: &ModelSpec) -> f64 {
    let log_frac = -2.0 * xi * (2.0 * (0.5 * lam).sin()).ln();
    log_frac + transfer_log_mod2(&spec.ma, false, lam) - transfer_log_mod2(&spec.ar, true, lam)
}

fn whittle_profile(xi: f64, nu: &[f64], pg: &TaperedPeriodogram, spec: &ModelSpec) -> f64 {
    let local = match spec.with_short(nu) {
        Ok(s) if s.validate().is_ok() => s,
        _ => return f64::INFINITY,
    };
    let m = pg.freqs.len() as f64;
    let mut ratio_sum = 0.0;
    let mut log_sum = 0.0;
    for (&lam, &i_val) in pg.freqs.iter().zip(&pg.values) {
        let log_k = log_spectral_shape(lam, xi, &local);
        ratio_sum += i_val * (-log_k).exp();
        log_sum += log_k;
    }
    let obj = (ratio_sum / m).ln() + log_sum / m;
    if obj.is_finite() {
        obj
    } else {
        f64::INFINITY
    }
}

/// Tapered discrete Whittle estimate. The trend block, which
/// the tapered periodogram is designed to be insensitive to, is estimated
/// afterwards by filtered least squares at the Whittle minimizer.
pub fn tapered_whittle_fit(
    y: &[f64],
    design: &RegressionDesign,
    spec: &ModelSpec,
    freq_skip: usize,
    grid: &GridSpec,
) -> Result<InitialFit> {
    check_series(y)?;
    if y.len() < 32 {
        return Err(Error::invalid(format!(
            "tapered Whittle needs n >= 32, got {}",
            y.len()
        )));
    }
    let pg = tapered_periodogram(y, freq_skip)?;
    let p = spec.short_len();
    let objective = |xi: f64, nu: &[f64]| whittle_profile(xi, nu, &pg, spec);

    let (xi, obj, hit) = minimize_memory(|xi| short_profile(&objective, xi, p).1, grid)?;
    let (nu, _) = short_profile(&objective, xi, p);

    // sigma2 = 2 pi m^{-1} sum I_j / k_j at the minimizer
    let local = spec.with_short(&nu)?;
    let m = pg.freqs.len() as f64;
    let mut ratio_sum = 0.0;
    for (&lam, &i_val) in pg.freqs.iter().zip(&pg.values) {
        ratio_sum += i_val * (-log_spectral_shape(lam, xi, &local)).exp();
    }
    let sigma2 = 2.0 * PI * ratio_sum / m;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::EstimationFailed(format!(
            "Whittle variance estimate {sigma2} is not positive"
        )));
    }

    let theta2 = if design.p2() > 0 {
        filtered_trend_ls(xi, &nu, y, design, spec)?.0
    } else {
        Vec::new()
    };

    Ok(InitialFit {
        params: Params::new(xi, nu, theta2, sigma2),
        objective: obj,
        method: InitialMethod::TaperedWhittle,
        hit_boundary: hit,
    })
}

/// Dispatch on the configured method.
pub fn initial_fit(
    method: InitialMethod,
    y: &[f64],
    design: &RegressionDesign,
    spec: &ModelSpec,
    freq_skip: usize,
    grid: &GridSpec,
) -> Result<InitialFit> {
    match method {
        InitialMethod::Css => css_fit(y, design, spec, grid),
        InitialMethod::TaperedWhittle => tapered_whittle_fit(y, design, spec, freq_skip, grid),
    }
}
