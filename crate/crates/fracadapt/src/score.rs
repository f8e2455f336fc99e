//! Series estimation of the innovation score function: least-squares
//! projection of psi onto the centered basis phi(h)^1, ..., phi(h)^L, with
//! coefficients obtained from the integration-by-parts moment identity
//! E{phi^(L) psi} = E{phi'^(L)}.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg;

/// Basis generator phi: the identity map or the bounded map s (1+s^2)^{-1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiKind {
    Identity,
    Bounded,
}

impl PhiKind {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            PhiKind::Identity => s,
            PhiKind::Bounded => s / (1.0 + s * s).sqrt(),
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        match self {
            PhiKind::Identity => 1.0,
            PhiKind::Bounded => (1.0 + s * s).powf(-1.5),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhiKind::Identity => "id",
            PhiKind::Bounded => "bounded",
        }
    }
}

impl FromStr for PhiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" => Ok(PhiKind::Identity),
            "bounded" => Ok(PhiKind::Bounded),
            other => Err(Error::invalid(format!(
                "unknown basis map '{other}' (expected id|bounded)"
            ))),
        }
    }
}

impl std::fmt::Display for PhiKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Basis configuration: the map phi and the number of series terms L >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisConfig {
    pub phi: PhiKind,
    pub order: usize,
}

impl BasisConfig {
    pub fn new(phi: PhiKind, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("basis order L must be at least 1"));
        }
        Ok(BasisConfig { phi, order })
    }
}

/// Fitted series score.
#[derive(Debug, Clone)]
pub struct ScoreFit {
    /// Projection coefficients a-hat (length L).
    pub coeffs: Vec<f64>,
    /// Centered Gram matrix W (L x L, row-major).
    pub gram: Vec<f64>,
    /// Basis-derivative means w (length L).
    pub deriv_means: Vec<f64>,
    /// Estimated information J_L = w' W^{-1} w.
    pub info: f64,
    /// Reciprocal condition number of W (conditioning diagnostic).
    pub rcond: f64,
    pub basis: BasisConfig,
}

const RCOND_FLOOR: f64 = 1e-14;

/// Fit the series score on standardized residuals `h`.
pub fn fit_score(h: &[f64], basis: BasisConfig) -> Result<ScoreFit> {
    let n = h.len();
    let l = basis.order;
    if n < l + 2 {
        return Err(Error::invalid(format!(
            "need at least L + 2 = {} observations, got {n}",
            l + 2
        )));
    }
    if h.iter().all(|&v| v == h[0]) {
        // zero-variance basis; the 1x1 Gram case would otherwise slip
        // through the condition check
        return Err(Error::SingularBasis { order: l, rcond: 0.0 });
    }

    // basis values phi(h_t)^1..phi(h_t)^L and their means
    let mut powers = vec![0.0; n * l];
    let mut means = vec![0.0; l];
    for (t, &ht) in h.iter().enumerate() {
        let base = basis.phi.value(ht);
        let mut p = 1.0;
        for k in 0..l {
            p *= base;
            powers[t * l + k] = p;
            means[k] += p;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);

    // centered Gram matrix and derivative means
    let mut gram = vec![0.0; l * l];
    let mut deriv_means = vec![0.0; l];
    for (t, &ht) in h.iter().enumerate() {
        let row = &powers[t * l..(t + 1) * l];
        for i in 0..l {
            let ci = row[i] - means[i];
            for j in 0..=i {
                gram[i * l + j] += ci * (row[j] - means[j]);
            }
        }
        let dphi = basis.phi.deriv(ht);
        let base = basis.phi.value(ht);
        let mut p = 1.0; // phi^{k-1}
        for k in 0..l {
            deriv_means[k] += (k + 1) as f64 * dphi * p;
            p *= base;
        }
    }
    for i in 0..l {
        for j in 0..=i {
            gram[i * l + j] /= n as f64;
            gram[j * l + i] = gram[i * l + j];
        }
    }
    deriv_means.iter_mut().for_each(|m| *m /= n as f64);

    let rcond = linalg::rcond_spd(&gram, l);
    if rcond < RCOND_FLOOR {
        return Err(Error::SingularBasis { order: l, rcond });
    }
    let coeffs = linalg::solve_spd(&gram, l, &deriv_means)
        .ok_or(Error::SingularBasis { order: l, rcond })?;
    let info = linalg::dot(&deriv_means, &coeffs);

    Ok(ScoreFit { coeffs, gram, deriv_means, info, rcond, basis })
}

/// Evaluate the fitted score on a sample, centering the basis with the means
/// of that same sample (self-evaluation).
pub fn eval_score(fit: &ScoreFit, h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let l = fit.basis.order;
    let mut means = vec![0.0; l];
    let bases: Vec<f64> = h.iter().map(|&ht| fit.basis.phi.value(ht)).collect();
    for &b in &bases {
        let mut p = 1.0;
        for m in means.iter_mut() {
            p *= b;
            *m += p;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);

    bases
        .iter()
        .map(|&b| {
            let mut p = 1.0;
            let mut acc = 0.0;
            for k in 0..l {
                p *= b;
                acc += fit.coeffs[k] * (p - means[k]);
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn basis(phi: PhiKind, order: usize) -> BasisConfig {
        BasisConfig::new(phi, order).unwrap()
    }

    #[test]
    fn hand_computed_three_point_fit() {
        let h = [-1.0, 0.0, 1.0];
        let fit = fit_score(&h, basis(PhiKind::Identity, 1)).unwrap();
        assert!((fit.gram[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((fit.deriv_means[0] - 1.0).abs() < 1e-15);
        assert!((fit.coeffs[0] - 1.5).abs() < 1e-12);
        assert!((fit.info - 1.5).abs() < 1e-12);
        let psi = eval_score(&fit, &h);
        assert!((psi[0] + 1.5).abs() < 1e-12);
        assert!(psi[1].abs() < 1e-12);
        assert!((psi[2] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_population_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 100_000;
        let h: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let fit = fit_score(&h, basis(PhiKind::Identity, 1)).unwrap();
        assert!((fit.coeffs[0] - 1.0).abs() < 0.05);
        assert!((fit.info - 1.0).abs() < 0.05);
        // the fitted score converges to psi(s) = s
        let psi = eval_score(&fit, &h);
        let mse: f64 = psi
            .iter()
            .zip(&h)
            .map(|(p, x)| (p - x) * (p - x))
            .sum::<f64>()
            / n as f64;
        assert!(mse < 0.01, "mse = {mse}");
    }

    #[test]
    fn constant_sample_is_singular() {
        let h = [0.7; 24];
        match fit_score(&h, basis(PhiKind::Identity, 1)) {
            Err(Error::SingularBasis { order: 1, .. }) => {}
            other => panic!("expected singular basis, got {other:?}"),
        }
    }

    #[test]
    fn too_short_sample_is_rejected() {
        let h = [0.1, 0.4];
        assert!(fit_score(&h, basis(PhiKind::Identity, 1)).is_err());
    }

    #[test]
    fn zero_coefficients_give_zero_score() {
        let h = [-1.0, 0.0, 1.0, 2.0];
        let mut fit = fit_score(&h, basis(PhiKind::Identity, 1)).unwrap();
        fit.coeffs[0] = 0.0;
        assert!(eval_score(&fit, &h).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fitted_score_is_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4000;
        let h: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for phi in [PhiKind::Identity, PhiKind::Bounded] {
            for l in 1..=4 {
                let fit = fit_score(&h, basis(phi, l)).unwrap();
                let psi = eval_score(&fit, &h);
                let total: f64 = psi.iter().sum();
                assert!(total.abs() / (n as f64) < 1e-10, "{phi} L={l}: {total}");
            }
        }
    }

    #[test]
    fn info_is_monotone_in_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for rep in 0..20 {
            let n = 600;
            let h: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            for phi in [PhiKind::Identity, PhiKind::Bounded] {
                let mut prev = 0.0;
                for l in 1..=4 {
                    let fit = fit_score(&h, basis(phi, l)).unwrap();
                    assert!(
                        fit.info >= prev - 1e-10,
                        "rep {rep} {phi} L={l}: {} < {prev}",
                        fit.info
                    );
                    prev = fit.info;
                }
            }
        }
    }

    #[test]
    fn bounded_derivative_matches_finite_difference() {
        let phi = PhiKind::Bounded;
        for &s in &[-2.5, -0.3, 0.0, 0.9, 4.0] {
            let h = 1e-6;
            let fd = (phi.value(s + h) - phi.value(s - h)) / (2.0 * h);
            assert!((phi.deriv(s) - fd).abs() < 1e-9);
        }
    }

    #[test]
    fn conditioning_diagnostic_degrades_with_order() {
        // warning metric only: log rcond of the Gram matrix shrinks roughly
        // linearly in L for the bounded basis on gaussian data
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let h: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut last = 1.0;
        for l in 1..=4 {
            let fit = fit_score(&h, basis(PhiKind::Bounded, l)).unwrap();
            println!("L={l}: ln rcond(W) = {:.2}", fit.rcond.ln());
            assert!(fit.rcond > 0.0 && fit.rcond <= last + 1e-15);
            last = fit.rcond;
        }
    }
}
