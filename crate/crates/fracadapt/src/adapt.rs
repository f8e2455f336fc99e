//! One-step efficient updates (adaptive and fully parametric), covariance
//! estimates, trend-rate normalization and Wald tests.
//!
//! The update takes a single Newton step from the initial estimate using the
//! fitted (or family-supplied) score evaluated at standardized residuals
//! h_t = E_t / sigma. All moment quantities are formed in standardized
//! units: with X_ti = E'_ti / sigma,
//!
//!   r_i = sum_t psi_t X_ti,  R_i = sum_t X_ti X_ti',  J = n^{-1} sum psi_t^2,
//!   theta_i <- theta_i - {R_i J}^{-1} r_i,
//!
//! which leaves the memory/short-memory update invariant to the scale of the
//! data and gives per-estimate covariances {J R_i}^{-1} directly.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::initial::InitialFit;
use crate::linalg;
use crate::model::{ModelSpec, Params};
use crate::optim::nelder_mead;
use crate::residuals::{residual_derivs, residuals, RegressionDesign};
use crate::score::{eval_score, fit_score, BasisConfig};
use crate::special::{chi2_sf, ln_gamma, normal_cdf};

/// Diagonal convergence-rate normalization for the trend block: entry j is
/// n^{chi_j - xi + 1/2}, with (log n)^{1/2} replacing the first entry in the
/// boundary case chi_1 = xi - 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendRates {
    pub diag: Vec<f64>,
}

pub fn trend_rates(chi: &[f64], xi: f64, n: usize) -> Result<TrendRates> {
    let nf = n as f64;
    let mut diag = Vec::with_capacity(chi.len());
    for (j, &c) in chi.iter().enumerate() {
        let expo = c - xi + 0.5;
        if expo < -1e-10 {
            return Err(Error::invalid(format!(
                "trend exponent {c} below the estimable boundary xi - 1/2"
            )));
        }
        if j == 0 && expo.abs() <= 1e-10 {
            diag.push(nf.ln().sqrt());
        } else {
            diag.push(nf.powf(expo));
        }
    }
    Ok(TrendRates { diag })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Adaptive,
    Parametric,
}

/// One-step estimation output. Covariance blocks are per-estimate variance
/// matrices (already on the scale of the reported estimates).
#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub params: Params,
    /// p1 x p1 covariance of (memory, short-memory) estimates, row-major.
    pub cov_first: Vec<f64>,
    /// p2 x p2 covariance of the trend estimates, row-major.
    pub cov_second: Vec<f64>,
    /// Estimated innovation information used in the step (J_L or J_n).
    pub info: f64,
    pub kind: EstimatorKind,
    /// Basis order L for the adaptive estimator.
    pub basis_order: Option<usize>,
    /// Conditioning diagnostic of the score-fit Gram matrix.
    pub score_rcond: Option<f64>,
    pub trend_rates: TrendRates,
}

struct StepBlocks {
    h: Vec<f64>,
    x_first: Vec<Vec<f64>>,
    x_second: Vec<Vec<f64>>,
}

fn standardized_blocks(
    y: &[f64],
    design: &RegressionDesign,
    spec: &ModelSpec,
    init: &Params,
) -> Result<StepBlocks> {
    let sigma = init.noise_var.sqrt();
    let (_, big_e) = residuals(init, y, design, spec)?;
    let derivs = residual_derivs(init, y, design, spec)?;
    let scale = |v: Vec<f64>| v.into_iter().map(|x| x / sigma).collect::<Vec<f64>>();
    Ok(StepBlocks {
        h: scale(big_e),
        x_first: derivs.first.into_iter().map(scale).collect(),
        x_second: derivs.second.into_iter().map(scale).collect(),
    })
}

/// Newton step for one block: returns (update, covariance).
fn block_step(x: &[Vec<f64>], psi: &[f64], info: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = x.len();
    if p == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut gram = vec![0.0; p * p];
    let mut score = vec![0.0; p];
    for i in 0..p {
        for j in 0..=i {
            let g = linalg::dot(&x[i], &x[j]);
            gram[i * p + j] = g;
            gram[j * p + i] = g;
        }
        score[i] = linalg::dot(&x[i], psi);
    }
    let inv = linalg::inv_spd(&gram, p)
        .ok_or_else(|| Error::DesignDegenerate("derivative Gram matrix is singular".into()))?;
    let step: Vec<f64> = linalg::mat_vec(&inv, p, &score)
        .into_iter()
        .map(|v| v / info)
        .collect();
    let cov: Vec<f64> = inv.iter().map(|v| v / info).collect();
    Ok((step, cov))
}

fn finish(
    init: &InitialFit,
    design: &RegressionDesign,
    blocks: &StepBlocks,
    psi: &[f64],
    info: f64,
    n: usize,
    kind: EstimatorKind,
    basis_order: Option<usize>,
    score_rcond: Option<f64>,
) -> Result<EstimationResult> {
    if !(info > 0.0) || !info.is_finite() {
        return Err(Error::EstimationFailed(format!(
            "estimated information {info} is not positive"
        )));
    }
    let (step1, cov1) = block_step(&blocks.x_first, psi, info)?;
    let (step2, cov2) = block_step(&blocks.x_second, psi, info)?;

    let mut params = init.params.clone();
    params.memory -= step1[0];
    for (v, s) in params.short.iter_mut().zip(&step1[1..]) {
        *v -= s;
    }
    for (v, s) in params.trend.iter_mut().zip(&step2) {
        *v -= s;
    }
    Ok(EstimationResult {
        params,
        cov_first: cov1,
        cov_second: cov2,
        info,
        kind,
        basis_order,
        score_rcond,
        trend_rates: trend_rates(&design.chi, init.params.memory, n)?,
    })
}

/// Adaptive (semiparametric) one-step estimate: fit the series score on the
/// standardized residuals at the initial estimate, then take one Newton step
/// in the memory/short-memory and trend blocks.
pub fn one_step_adaptive(
    y: &[f64],
    design: &RegressionDesign,
    spec: &ModelSpec,
    init: &InitialFit,
    basis: BasisConfig,
) -> Result<EstimationResult> {
    let n = y.len();
    let p1 = spec.p1();
    let p2 = design.p2();
    if n < basis.order + p1 + p2 + 2 {
        return Err(Error::invalid(format!(
            "sample size {n} too small for L = {}, p1 = {p1}, p2 = {p2}",
            basis.order
        )));
    }
    let blocks = standardized_blocks(y, design, spec, &init.params)?;
    let fit = fit_score(&blocks.h, basis)?;
    let psi = eval_score(&fit, &blocks.h);
    let info = psi.iter().map(|v| v * v).sum::<f64>() / n as f64;
    finish(
        init,
        design,
        &blocks,
        &psi,
        info,
        n,
        EstimatorKind::Adaptive,
        Some(basis.order),
        Some(fit.rcond),
    )
}

/// A parametric innovation density g(s; theta3) on the unit-variance scale.
pub trait ParametricFamily {
    fn name(&self) -> &'static str;
    /// Dimension of theta3 (may be zero for fully specified densities).
    fn dim(&self) -> usize;
    fn start(&self) -> Vec<f64>;
    /// Compact admissible box for theta3.
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn log_density(&self, s: f64, theta3: &[f64]) -> f64;
    /// Score -d/ds log g(s; theta3).
    fn score(&self, s: f64, theta3: &[f64]) -> f64;
    /// Gradient of log g with respect to theta3.
    fn dlog_dtheta(&self, s: f64, theta3: &[f64]) -> Vec<f64>;
}

/// Parametric one-step result: the usual blocks plus the density parameter
/// estimate and its covariance.
#[derive(Debug, Clone)]
pub struct ParametricResult {
    pub base: EstimationResult,
    pub theta3: Vec<f64>,
    /// p3 x p3 per-estimate covariance of theta3.
    pub cov_theta3: Vec<f64>,
}

/// Fully parametric one-step estimate: fit theta3 by maximizing the
/// quasi-likelihood of the standardized residuals, then take the Newton step
/// with the family score. A misspecified family is not detected here; the
/// reported information simply reflects the family used.
pub fn one_step_parametric(
    y: &[f64],
    design: &RegressionDesign,
    spec: &ModelSpec,
    init: &InitialFit,
    family: &dyn ParametricFamily,
) -> Result<ParametricResult> {
    let n = y.len();
    let p1 = spec.p1();
    let p2 = design.p2();
    if n < p1 + p2 + 2 {
        return Err(Error::invalid(format!(
            "sample size {n} too small for p1 = {p1}, p2 = {p2}"
        )));
    }
    let blocks = standardized_blocks(y, design, spec, &init.params)?;

    let bounds = family.bounds();
    let neg_loglik = |t3: &[f64]| {
        if t3.iter().zip(&bounds).any(|(v, (lo, hi))| v < lo || v > hi) {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for &ht in &blocks.h {
            acc -= family.log_density(ht, t3);
        }
        acc
    };
    let (theta3, value) = nelder_mead(neg_loglik, &family.start(), 0.25, 1e-10, 800);
    if !value.is_finite() {
        return Err(if family.dim() == 0 {
            Error::InvalidFamily(format!(
                "family '{}' has non-finite log-density on the residuals",
                family.name()
            ))
        } else {
            Error::EstimationFailed(format!(
                "theta3 optimization failed for family '{}'",
                family.name()
            ))
        });
    }

    let psi: Vec<f64> = blocks.h.iter().map(|&ht| family.score(ht, &theta3)).collect();
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidFamily(format!(
            "family '{}' has a non-finite score on the residuals",
            family.name()
        )));
    }
    let info = psi.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let base = finish(
        init,
        design,
        &blocks,
        &psi,
        info,
        n,
        EstimatorKind::Parametric,
        None,
        None,
    )?;

    // Outer-product covariance of theta3.
    let p3 = family.dim();
    let cov_theta3 = if p3 == 0 {
        Vec::new()
    } else {
        let mut outer = vec![0.0; p3 * p3];
        for &ht in &blocks.h {
            let d = family.dlog_dtheta(ht, &theta3);
            for i in 0..p3 {
                for j in 0..=i {
                    outer[i * p3 + j] += d[i] * d[j];
                }
            }
        }
        for i in 0..p3 {
            for j in 0..=i {
                outer[i * p3 + j] /= n as f64;
                outer[j * p3 + i] = outer[i * p3 + j];
            }
        }
        let inv = linalg::inv_spd(&outer, p3).ok_or_else(|| {
            Error::EstimationFailed("theta3 outer-product matrix is singular".into())
        })?;
        inv.iter().map(|v| v / n as f64).collect()
    };

    Ok(ParametricResult { base, theta3, cov_theta3 })
}

/// Which parameter block a restriction applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamBlock {
    /// (memory, short-memory) block.
    MemoryArma,
    /// trend-coefficient block.
    Trend,
}

/// Linear hypothesis C theta = value on one block.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub block: ParamBlock,
    /// r x p contrast matrix, one row per restriction.
    pub contrasts: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl Restriction {
    /// Test a single coordinate of a block against a value.
    pub fn coordinate(block: ParamBlock, index: usize, dim: usize, value: f64) -> Self {
        let mut row = vec![0.0; dim];
        row[index] = 1.0;
        Restriction { block, contrasts: vec![row], values: vec![value] }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WaldTest {
    /// Chi-square statistic, or the signed root for one-sided scalar tests.
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    pub one_sided: bool,
}

/// Wald test of a linear restriction against the estimated covariance.
/// One-sided tests require a scalar restriction and use the signed root
/// against the standard normal.
pub fn wald_test(
    result: &EstimationResult,
    restriction: &Restriction,
    one_sided: bool,
) -> Result<WaldTest> {
    let (est, cov): (Vec<f64>, &[f64]) = match restriction.block {
        ParamBlock::MemoryArma => {
            let mut v = vec![result.params.memory];
            v.extend_from_slice(&result.params.short);
            (v, &result.cov_first)
        }
        ParamBlock::Trend => (result.params.trend.clone(), &result.cov_second),
    };
    let p = est.len();
    let r = restriction.contrasts.len();
    if r == 0 || r > p || restriction.values.len() != r {
        return Err(Error::InvalidRestriction(format!(
            "restriction dimension {r} incompatible with parameter dimension {p}"
        )));
    }
    if restriction.contrasts.iter().any(|row| row.len() != p) {
        return Err(Error::InvalidRestriction(
            "contrast row length does not match parameter dimension".into(),
        ));
    }
    if one_sided && r != 1 {
        return Err(Error::InvalidRestriction(
            "one-sided tests require a scalar restriction".into(),
        ));
    }

    // d = C theta - value, V = C cov C'
    let d: Vec<f64> = restriction
        .contrasts
        .iter()
        .zip(&restriction.values)
        .map(|(row, v)| linalg::dot(row, &est) - v)
        .collect();
    let mut v_mat = vec![0.0; r * r];
    for i in 0..r {
        let cov_ci = linalg::mat_vec(cov, p, &restriction.contrasts[i]);
        for j in 0..=i {
            let val = linalg::dot(&restriction.contrasts[j], &cov_ci);
            v_mat[i * r + j] = val;
            v_mat[j * r + i] = val;
        }
    }

    if one_sided {
        let variance = v_mat[0];
        if !(variance > 0.0) {
            return Err(Error::InvalidRestriction(
                "restricted covariance is not positive definite".into(),
            ));
        }
        let z = d[0] / variance.sqrt();
        return Ok(WaldTest {
            statistic: z,
            p_value: 1.0 - normal_cdf(z),
            dof: 1,
            one_sided: true,
        });
    }

    let solved = linalg::solve_spd(&v_mat, r, &d).ok_or_else(|| {
        Error::InvalidRestriction("restricted covariance is not positive definite".into())
    })?;
    let stat = linalg::dot(&d, &solved);
    Ok(WaldTest {
        statistic: stat,
        p_value: chi2_sf(stat, r as f64),
        dof: r,
        one_sided: false,
    })
}

/// Asymptotic information for the memory order of a pure fractional model:
/// sum_{j>=1} j^{-2} = pi^2 / 6. The efficient variance bound for the memory
/// estimate is 1 / (J * this).
pub fn memory_info_pure_fractional() -> f64 {
    PI * PI / 6.0
}

/// Limit of D_n^{-1} R_2 D_n^{-1} (standardized trend information): entry
/// (i, j) is K_i K_j c_i c_j / {(c_i + c_j + 1)(c_i + 1)(c_j + 1)} /
/// (sigma^2 beta(1)^2), where c_i = chi_i - xi and K_i =
/// Gamma(chi_i + 1) / Gamma(c_i + 1) is the constant from filtering t^chi.
pub fn trend_info_limit(chi: &[f64], xi: f64, sigma2: f64, beta_at_one: f64) -> Vec<f64> {
    let p = chi.len();
    let c: Vec<f64> = chi.iter().map(|&x| x - xi).collect();
    let k: Vec<f64> = chi
        .iter()
        .zip(&c)
        .map(|(&x, &ci)| (ln_gamma(x + 1.0) - ln_gamma(ci + 1.0)).exp())
        .collect();
    let mut out = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            out[i * p + j] = k[i] * k[j] * c[i] * c[j]
                / ((c[i] + c[j] + 1.0) * (c[i] + 1.0) * (c[j] + 1.0))
                / (sigma2 * beta_at_one * beta_at_one);
        }
    }
    out
}

/// The displayed Cauchy-matrix form of the trend information with its
/// sigma^2 beta(1)^2 / (2 pi) prefactor and the boundary-row replacement;
/// kept for the positive-definiteness sanity check.
pub fn trend_info_display(chi: &[f64], xi: f64, sigma2: f64, beta_at_one: f64) -> Vec<f64> {
    let p = chi.len();
    let c: Vec<f64> = chi.iter().map(|&x| x - xi).collect();
    let pref = sigma2 * beta_at_one * beta_at_one / (2.0 * PI);
    let boundary = (c[0] + 0.5).abs() <= 1e-10;
    let mut out = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            out[i * p + j] = if boundary && (i == 0 || j == 0) {
                if i == 0 && j == 0 {
                    pref
                } else {
                    0.0
                }
            } else {
                pref * (2.0 * c[i] + 1.0).sqrt() * (2.0 * c[j] + 1.0).sqrt() * c[i] * c[j]
                    / ((c[i] + c[j] + 1.0) * (c[i] + 1.0) * (c[j] + 1.0))
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialMethod;
    use crate::model::simulate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_series(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn init_at(params: Params) -> InitialFit {
        InitialFit {
            objective: params.noise_var,
            params,
            method: InitialMethod::Css,
            hit_boundary: false,
        }
    }

    #[test]
    fn trend_rate_values() {
        let d = trend_rates(&[1.0], 0.25, 100).unwrap();
        assert!((d.diag[0] - 100f64.powf(1.25)).abs() < 1e-9);
        let d = trend_rates(&[0.25], 0.25, 1000).unwrap();
        assert!((d.diag[0] - 1000f64.sqrt()).abs() < 1e-9);
        // boundary chi = xi - 1/2 at n = 55 ~ e^4: entries near 2
        let d = trend_rates(&[-0.25], 0.25, 55).unwrap();
        assert!((d.diag[0] - 2.0).abs() < 2e-3, "{}", d.diag[0]);
        assert!(trend_rates(&[-0.3], 0.25, 100).is_err());
    }

    #[test]
    fn no_trend_block_degenerates_gracefully() {
        let spec = ModelSpec::pure_fractional();
        let design = RegressionDesign::empty();
        let n = 256;
        let eps = gaussian_series(3, n + 512);
        let truth = Params::new(0.25, vec![], vec![], 1.0);
        let y = simulate(&truth, &spec, n, &eps, 512).unwrap();
        let init = init_at(truth);
        let basis = BasisConfig::new(crate::score::PhiKind::Identity, 1).unwrap();
        let res = one_step_adaptive(&y, &design, &spec, &init, basis).unwrap();
        assert!(res.params.trend.is_empty());
        assert!(res.cov_second.is_empty());
        assert!(res.cov_first.len() == 1 && res.cov_first[0] > 0.0);
        assert!(res.info > 0.0);
        // the memory step from the truth is small
        assert!((res.params.memory - 0.25).abs() < 0.25);
    }

    #[test]
    fn update_contracts_toward_truth() {
        // starting the step from a perturbed point must move back toward the
        // truth, and from the truth it must stay nearby
        let spec = ModelSpec::pure_fractional();
        let design = RegressionDesign::empty();
        let n = 2048;
        let basis = BasisConfig::new(crate::score::PhiKind::Identity, 1).unwrap();
        let mut dev_from_biased = 0.0;
        let mut dev_from_truth = 0.0;
        let reps = 20;
        for seed in 0..reps {
            let eps = gaussian_series(100 + seed, n + 2048);
            let truth = Params::new(0.25, vec![], vec![], 1.0);
            let y = simulate(&truth, &spec, n, &eps, 2048).unwrap();

            let biased = init_at(Params::new(0.32, vec![], vec![], 1.0));
            let res = one_step_adaptive(&y, &design, &spec, &biased, basis).unwrap();
            dev_from_biased += (res.params.memory - 0.25).abs();

            let exact = init_at(truth);
            let res = one_step_adaptive(&y, &design, &spec, &exact, basis).unwrap();
            dev_from_truth += (res.params.memory - 0.25).abs();
        }
        dev_from_biased /= reps as f64;
        dev_from_truth /= reps as f64;
        // one step from a 0.07-biased start must come well inside the bias
        assert!(dev_from_biased < 0.035, "mean |xi - 0.25| = {dev_from_biased}");
        assert!(dev_from_truth < 0.03, "mean |xi - 0.25| = {dev_from_truth}");
    }

    #[test]
    fn scale_equivariance_of_one_step() {
        let spec = ModelSpec::pure_fractional();
        let design = RegressionDesign::classify(&[1.0], 0.25).unwrap();
        let n = 160;
        let eps = gaussian_series(8, n + 256);
        let truth = Params::new(0.25, vec![], vec![0.5], 1.0);
        let mut y = simulate(&truth, &spec, n, &eps, 256).unwrap();
        for (t, v) in y.iter_mut().enumerate() {
            *v += 0.5 * (t + 1) as f64;
        }
        let basis = BasisConfig::new(crate::score::PhiKind::Identity, 1).unwrap();

        let res1 = {
            let init = init_at(Params::new(0.22, vec![], vec![0.48], 0.9));
            one_step_adaptive(&y, &design, &spec, &init, basis).unwrap()
        };
        let c = 3.5;
        let yc: Vec<f64> = y.iter().map(|v| c * v).collect();
        let res2 = {
            let init = init_at(Params::new(0.22, vec![], vec![c * 0.48], c * c * 0.9));
            one_step_adaptive(&yc, &design, &spec, &init, basis).unwrap()
        };
        assert!((res1.params.memory - res2.params.memory).abs() < 1e-8);
        assert!((c * res1.params.trend[0] - res2.params.trend[0]).abs() < 1e-8);
    }

    #[test]
    fn wald_restriction_at_estimate_is_null() {
        let spec = ModelSpec::pure_fractional();
        let design = RegressionDesign::empty();
        let n = 256;
        let eps = gaussian_series(21, n + 256);
        let truth = Params::new(0.25, vec![], vec![], 1.0);
        let y = simulate(&truth, &spec, n, &eps, 256).unwrap();
        let init = init_at(truth);
        let basis = BasisConfig::new(crate::score::PhiKind::Identity, 1).unwrap();
        let res = one_step_adaptive(&y, &design, &spec, &init, basis).unwrap();

        let r = Restriction::coordinate(ParamBlock::MemoryArma, 0, 1, res.params.memory);
        let w = wald_test(&res, &r, false).unwrap();
        assert!(w.statistic.abs() < 1e-20);
        assert!((w.p_value - 1.0).abs() < 1e-12);

        // dimension mismatch is rejected
        let bad = Restriction {
            block: ParamBlock::MemoryArma,
            contrasts: vec![vec![1.0, 0.0]],
            values: vec![0.0],
        };
        assert!(wald_test(&res, &bad, false).is_err());

        // the one-sided statistic is the signed root of the two-sided one,
        // with p = 1 - Phi(z)
        let r0 = Restriction::coordinate(ParamBlock::MemoryArma, 0, 1, 0.0);
        let two = wald_test(&res, &r0, false).unwrap();
        let one = wald_test(&res, &r0, true).unwrap();
        assert!((one.statistic * one.statistic - two.statistic).abs() < 1e-12);
        assert!(
            (one.p_value - (1.0 - crate::special::normal_cdf(one.statistic))).abs() < 1e-12
        );
    }

    #[test]
    fn trend_info_limit_matches_simple_regression() {
        // chi = 1, xi = 0: the classical slope-with-intercept information 1/12
        let m = trend_info_limit(&[1.0], 0.0, 1.0, 1.0);
        assert!((m[0] - 1.0 / 12.0).abs() < 1e-12, "{}", m[0]);
    }

    #[test]
    fn trend_info_display_is_positive_definite() {
        let m = trend_info_display(&[0.5, 1.0], 0.25, 1.0, 1.0);
        assert!(linalg::is_spd(&m, 2));
        // boundary variant
        let m = trend_info_display(&[-0.25, 1.0], 0.25, 1.0, 1.0);
        assert!(linalg::is_spd(&m, 2));
        assert_eq!(m[1], 0.0);
    }
}
