//! FARIMA model specification, AR-representation coefficients, derivative
//! filters and type-II (truncated) process simulation.
//!
//! The stochastic component is u_t -> v_t = fractional integration of order
//! zeta -> truncation at t >= 1 -> m0-fold integer integration, where the
//! memory order splits as xi = m0 + zeta with |zeta| < 1/2. The one-sided AR
//! representation has transfer function
//! (1 - s)^xi AR(s) / MA(s), whose truncated coefficients drive everything
//! downstream (residuals, scores, updates).

use crate::error::{Error, Result};
use crate::fracfilter::{apply_filter, convolve, delta_coeffs, log_coeffs, series_inverse, FilterCoeffs};
use crate::special::ln_gamma;
use crate::FilterCoeffs64;

/// Orders and short-memory coefficients of the FARIMA model plus the trend
/// exponents of the deterministic component.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    /// AR coefficients a_k of the polynomial 1 - a_1 s - ... - a_p s^p.
    pub ar: Vec<f64>,
    /// MA coefficients b_k of the polynomial 1 + b_1 s + ... + b_q s^q.
    pub ma: Vec<f64>,
    /// Trend exponents tau_1 < ... < tau_q of the generalized polynomial.
    pub regression_exponents: Vec<f64>,
}

impl ModelSpec {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>, regression_exponents: Vec<f64>) -> Result<Self> {
        let spec = ModelSpec { ar, ma, regression_exponents };
        spec.validate()?;
        Ok(spec)
    }

    /// Pure FARIMA(0, xi, 0) with no deterministic trend.
    pub fn pure_fractional() -> Self {
        ModelSpec { ar: Vec::new(), ma: Vec::new(), regression_exponents: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !roots_outside_unit_circle(&ar_polynomial(&self.ar)) {
            return Err(Error::invalid(
                "AR polynomial must have all roots outside the unit circle",
            ));
        }
        if !roots_outside_unit_circle(&ma_polynomial(&self.ma)) {
            return Err(Error::invalid(
                "MA polynomial must have all roots outside the unit circle",
            ));
        }
        if self
            .regression_exponents
            .windows(2)
            .any(|w| !(w[0] < w[1]))
        {
            return Err(Error::invalid(
                "regression exponents must be strictly increasing",
            ));
        }
        Ok(())
    }

    /// Number of short-memory parameters (p1 - 1).
    pub fn short_len(&self) -> usize {
        self.ar.len() + self.ma.len()
    }

    /// Dimension of the memory/short-memory block (p1 = 1 + p11 + p12).
    pub fn p1(&self) -> usize {
        1 + self.short_len()
    }

    /// Spec with the short-memory coefficients replaced by `short`
    /// (first p11 entries AR, remaining p12 entries MA).
    pub fn with_short(&self, short: &[f64]) -> Result<ModelSpec> {
        if short.len() != self.short_len() {
            return Err(Error::invalid(format!(
                "short-memory parameter length {} does not match orders ({}, {})",
                short.len(),
                self.ar.len(),
                self.ma.len()
            )));
        }
        let (ar, ma) = short.split_at(self.ar.len());
        Ok(ModelSpec {
            ar: ar.to_vec(),
            ma: ma.to_vec(),
            regression_exponents: self.regression_exponents.clone(),
        })
    }

    /// Packed short-memory coefficients (AR then MA).
    pub fn short_params(&self) -> Vec<f64> {
        let mut v = self.ar.clone();
        v.extend_from_slice(&self.ma);
        v
    }
}

fn ar_polynomial(ar: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(ar.len() + 1);
    p.push(1.0);
    p.extend(ar.iter().map(|a| -a));
    p
}

fn ma_polynomial(ma: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(ma.len() + 1);
    p.push(1.0);
    p.extend_from_slice(ma);
    p
}

/// Schur-Cohn step-down test: all roots of 1 + c_1 s + ... + c_m s^m
/// strictly outside the unit circle.
fn roots_outside_unit_circle(poly: &[f64]) -> bool {
    let mut a: Vec<f64> = poly[1..].to_vec();
    while let Some(&k) = a.last() {
        if !(k.abs() < 1.0) {
            return false;
        }
        let m = a.len();
        let denom = 1.0 - k * k;
        let reduced: Vec<f64> = (0..m - 1)
            .map(|j| (a[j] - k * a[m - 2 - j]) / denom)
            .collect();
        a = reduced;
    }
    true
}

/// Full parameter point: memory order xi, short-memory coefficients nu
/// (AR then MA), trend coefficients on the estimable regressors, and the
/// innovation-scale variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub memory: f64,
    pub short: Vec<f64>,
    pub trend: Vec<f64>,
    pub noise_var: f64,
}

impl Params {
    pub fn new(memory: f64, short: Vec<f64>, trend: Vec<f64>, noise_var: f64) -> Self {
        Params { memory, short, trend, noise_var }
    }

    /// Admissibility: xi in (-1/2, inf) away from half-integers, positive
    /// variance, short-memory coefficients in the stationary and invertible
    /// region of `spec`.
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        if !(self.memory > -0.5) || !self.memory.is_finite() {
            return Err(Error::invalid(format!(
                "memory order {} must lie in (-1/2, inf)",
                self.memory
            )));
        }
        let frac = self.memory - 0.5;
        if frac >= 0.0 && (frac - frac.round()).abs() <= 1e-8 {
            return Err(Error::invalid(format!(
                "memory order {} too close to a half-integer",
                self.memory
            )));
        }
        if !(self.noise_var > 0.0) || !self.noise_var.is_finite() {
            return Err(Error::invalid("noise variance must be positive"));
        }
        spec.with_short(&self.short)?.validate()
    }

    /// Split xi = m0 + zeta with m0 the smallest nonnegative integer putting
    /// zeta in (-1/2, 1/2).
    pub fn memory_decompose(memory: f64) -> Result<(usize, f64)> {
        if !(memory > -0.5) {
            return Err(Error::invalid(format!(
                "memory order {memory} must exceed -1/2"
            )));
        }
        let m0 = if memory < 0.5 { 0 } else { (memory + 0.5).floor() as usize };
        let zeta = memory - m0 as f64;
        if zeta.abs() >= 0.5 {
            return Err(Error::invalid(format!(
                "memory order {memory} has no admissible integer/fractional split"
            )));
        }
        Ok((m0, zeta))
    }
}

/// Truncated coefficients of (1 - s)^xi AR(s) / MA(s); the first
/// coefficient is identically 1.
pub fn ar_coeffs(memory: f64, short: &[f64], spec: &ModelSpec, n: usize) -> Result<FilterCoeffs64> {
    let spec = spec.with_short(short)?;
    let frac = delta_coeffs(-memory, n)?;
    let arp = FilterCoeffs::new(ar_polynomial(&spec.ar))?;
    let map = FilterCoeffs::new(ma_polynomial(&spec.ma))?;
    let inv_ma = series_inverse(&map, n)?;
    convolve(&convolve(&frac, &arp, n)?, &inv_ma, n)
}

/// Coefficients of (1 - s)^{-xi} MA(s) / AR(s), the inverse of [`ar_coeffs`]
/// as a power series (the MA-side transfer function of the process).
pub fn ma_coeffs(memory: f64, short: &[f64], spec: &ModelSpec, n: usize) -> Result<FilterCoeffs64> {
    let spec = spec.with_short(short)?;
    let frac = delta_coeffs(memory, n)?;
    let arp = FilterCoeffs::new(ar_polynomial(&spec.ar))?;
    let map = FilterCoeffs::new(ma_polynomial(&spec.ma))?;
    let inv_ar = series_inverse(&arp, n)?;
    convolve(&convolve(&frac, &map, n)?, &inv_ar, n)
}

/// Derivative filters of [`ar_coeffs`] with respect to (xi, nu): one row per
/// parameter. Row 1 is the xi-derivative log(1-s) (1-s)^xi AR(s)/MA(s); an
/// AR-coefficient row is -s^k (1-s)^xi / MA(s); an MA-coefficient row is
/// -s^k (1-s)^xi AR(s) / MA(s)^2.
pub fn ar_deriv_coeffs(
    memory: f64,
    short: &[f64],
    spec: &ModelSpec,
    n: usize,
) -> Result<Vec<FilterCoeffs64>> {
    let spec_local = spec.with_short(short)?;
    let mut rows = Vec::with_capacity(spec_local.p1());

    let alpha = ar_coeffs(memory, short, spec, n)?;
    let minus_log = log_coeffs(n)?; // -log(1-s)
    rows.push(convolve(&alpha, &minus_log, n)?.scale(-1.0));

    let frac = delta_coeffs(-memory, n)?;
    let map = FilterCoeffs::new(ma_polynomial(&spec_local.ma))?;
    let inv_ma = series_inverse(&map, n)?;

    if !spec_local.ar.is_empty() {
        let base = convolve(&frac, &inv_ma, n)?;
        for k in 1..=spec_local.ar.len() {
            rows.push(base.shift(k).scale(-1.0));
        }
    }
    if !spec_local.ma.is_empty() {
        let arp = FilterCoeffs::new(ar_polynomial(&spec_local.ar))?;
        let inv_ma2 = convolve(&inv_ma, &inv_ma, n)?;
        let base = convolve(&convolve(&frac, &arp, n)?, &inv_ma2, n)?;
        for k in 1..=spec_local.ma.len() {
            rows.push(base.shift(k).scale(-1.0));
        }
    }
    Ok(rows)
}

/// Simulate x_1..x_n of the type-II fractional process driven by the
/// provided innovations (length n + burn_in). The stationary fractional part
/// is approximated by a truncated moving average over the burn-in history;
/// the integer part is exact cumulative summation started at t = 1.
pub fn simulate(
    params: &Params,
    spec: &ModelSpec,
    n: usize,
    eps: &[f64],
    burn_in: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("simulate: sample size must be positive"));
    }
    if eps.len() != n + burn_in {
        return Err(Error::invalid(format!(
            "simulate: innovation series has length {}, need n + burn_in = {}",
            eps.len(),
            n + burn_in
        )));
    }
    let spec = spec.with_short(&params.short)?;
    let (m0, zeta) = Params::memory_decompose(params.memory)?;
    let sigma = params.noise_var.sqrt();
    let total = n + burn_in;

    // ARMA recursion for u, seeded with zeros before the burn-in window.
    let mut u = vec![0.0; total];
    for t in 0..total {
        let mut val = eps[t];
        for (k, b) in spec.ma.iter().enumerate() {
            if t > k {
                val += b * eps[t - k - 1];
            }
        }
        val *= sigma;
        for (k, a) in spec.ar.iter().enumerate() {
            if t > k {
                val += a * u[t - k - 1];
            }
        }
        u[t] = val;
    }

    // Stationary fractional integration of order zeta, truncated to the
    // available history.
    let mut x = vec![0.0; n];
    if zeta == 0.0 {
        x.copy_from_slice(&u[burn_in..]);
    } else {
        let dz = delta_coeffs(zeta, total)?;
        let dzc = dz.coeffs();
        for (t, slot) in x.iter_mut().enumerate() {
            let iu = burn_in + t;
            let mut acc = 0.0;
            for j in 0..=iu {
                acc += dzc[j] * u[iu - j];
            }
            *slot = acc;
        }
    }

    // Integer integration of the truncated series.
    for _ in 0..m0 {
        for t in 1..n {
            x[t] += x[t - 1];
        }
    }
    Ok(x)
}

/// Autocovariance gamma(k) of a stationary FARIMA(0, d, 0) process with
/// |d| < 1/2: the closed form used as a simulation oracle.
pub fn fractional_noise_acf(d: f64, sigma2: f64, lag: usize) -> Result<f64> {
    if !(d.abs() < 0.5) {
        return Err(Error::invalid(format!(
            "fractional_noise_acf: |d| must be below 1/2, got {d}"
        )));
    }
    let gamma0 = if d == 0.0 {
        sigma2
    } else {
        sigma2 * (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp()
    };
    let mut g = gamma0;
    for k in 1..=lag {
        let kf = k as f64;
        g *= (kf - 1.0 + d) / (kf - d);
    }
    Ok(g)
}

/// Apply the truncated AR filter of `(memory, short)` to a series.
pub fn ar_filter(
    memory: f64,
    short: &[f64],
    spec: &ModelSpec,
    x: &[f64],
) -> Result<Vec<f64>> {
    let coeffs = ar_coeffs(memory, short, spec, x.len())?;
    apply_filter(&coeffs, x)
}
