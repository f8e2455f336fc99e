//! Innovation distributions for the Monte Carlo study: standard normal, a
//! symmetric two-point normal mixture, a contaminated ("asymmetric mixed")
//! normal, Laplace and Student t5 — each rescaled to unit variance — together
//! with their true score functions and Fisher informations, which serve as
//! oracles for the efficiency checks.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::quad;

/// sqrt of the second moment of 0.5 N(-3,1) + 0.5 N(3,1).
const SYM_MIX_SCALE: f64 = 3.162_277_660_168_379_5; // sqrt(10)
/// sqrt of the second moment of 0.05 N(0,25) + 0.95 N(0,1).
const ASYM_MIX_SCALE: f64 = 1.483_239_697_419_133; // sqrt(2.2)

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnovationKind {
    Gaussian,
    /// 0.5 N(-3, 1) + 0.5 N(3, 1), scaled by 1/sqrt(10).
    MixtureSymmetric,
    /// 0.05 N(0, 25) + 0.95 N(0, 1), scaled by 1/sqrt(2.2).
    MixtureContaminated,
    /// Laplace scaled to unit variance: density 2^{-1/2} exp(-sqrt(2)|s|).
    Laplace,
    /// Student t with 5 degrees of freedom, scaled by sqrt(3/5).
    StudentT5,
}

impl InnovationKind {
    pub fn all() -> [InnovationKind; 5] {
        [
            InnovationKind::Gaussian,
            InnovationKind::MixtureSymmetric,
            InnovationKind::MixtureContaminated,
            InnovationKind::Laplace,
            InnovationKind::StudentT5,
        ]
    }

    /// CLI name.
    pub fn name(&self) -> &'static str {
        match self {
            InnovationKind::Gaussian => "gaussian",
            InnovationKind::MixtureSymmetric => "mixsym",
            InnovationKind::MixtureContaminated => "mixasym",
            InnovationKind::Laplace => "laplace",
            InnovationKind::StudentT5 => "t5",
        }
    }
}

impl FromStr for InnovationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(InnovationKind::Gaussian),
            "mixsym" => Ok(InnovationKind::MixtureSymmetric),
            "mixasym" => Ok(InnovationKind::MixtureContaminated),
            "laplace" => Ok(InnovationKind::Laplace),
            "t5" => Ok(InnovationKind::StudentT5),
            other => Err(Error::invalid(format!(
                "unknown innovation distribution '{other}' \
                 (expected gaussian|mixsym|mixasym|laplace|t5)"
            ))),
        }
    }
}

impl std::fmt::Display for InnovationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A unit-variance innovation distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InnovationDist {
    pub kind: InnovationKind,
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

impl InnovationDist {
    pub fn new(kind: InnovationKind) -> Self {
        InnovationDist { kind }
    }

    /// Draw one unit-variance innovation.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            InnovationKind::Gaussian => rng.sample(StandardNormal),
            InnovationKind::MixtureSymmetric => {
                let center = if rng.gen::<bool>() { 3.0 } else { -3.0 };
                let z: f64 = rng.sample(StandardNormal);
                (center + z) / SYM_MIX_SCALE
            }
            InnovationKind::MixtureContaminated => {
                let z: f64 = rng.sample(StandardNormal);
                let x = if rng.gen::<f64>() < 0.05 { 5.0 * z } else { z };
                x / ASYM_MIX_SCALE
            }
            InnovationKind::Laplace => {
                let e1: f64 = rng.sample(Exp1);
                let e2: f64 = rng.sample(Exp1);
                (e1 - e2) / std::f64::consts::SQRT_2
            }
            InnovationKind::StudentT5 => {
                let t: f64 = StudentT::new(5.0).unwrap().sample(rng);
                t * (3.0f64 / 5.0).sqrt()
            }
        }
    }

    /// i.i.d. sample of length n.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::invalid("sample size must be positive"));
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }

    /// Unit-variance density g(s).
    pub fn density(&self, s: f64) -> f64 {
        match self.kind {
            InnovationKind::Gaussian => std_normal_pdf(s),
            InnovationKind::MixtureSymmetric => {
                let c = SYM_MIX_SCALE;
                let x = c * s;
                c * 0.5 * (std_normal_pdf(x + 3.0) + std_normal_pdf(x - 3.0))
            }
            InnovationKind::MixtureContaminated => {
                let c = ASYM_MIX_SCALE;
                let x = c * s;
                c * (0.05 * std_normal_pdf(x / 5.0) / 5.0 + 0.95 * std_normal_pdf(x))
            }
            InnovationKind::Laplace => {
                (-std::f64::consts::SQRT_2 * s.abs()).exp() / std::f64::consts::SQRT_2
            }
            InnovationKind::StudentT5 => {
                let c = (3.0f64 / 5.0).sqrt();
                let x = s / c;
                let norm = (crate::special::ln_gamma(3.0) - crate::special::ln_gamma(2.5)).exp()
                    / (5.0 * PI).sqrt();
                norm * (1.0 + x * x / 5.0).powi(-3) / c
            }
        }
    }

    /// True score psi(s) = -g'(s)/g(s) of the unit-variance density.
    /// The Laplace kink at zero uses the symmetric convention psi(0) = 0.
    pub fn score(&self, s: f64) -> f64 {
        match self.kind {
            InnovationKind::Gaussian => s,
            InnovationKind::MixtureSymmetric => {
                let c = SYM_MIX_SCALE;
                let x = c * s;
                let (pl, pr) = (std_normal_pdf(x + 3.0), std_normal_pdf(x - 3.0));
                c * ((x + 3.0) * pl + (x - 3.0) * pr) / (pl + pr)
            }
            InnovationKind::MixtureContaminated => {
                let c = ASYM_MIX_SCALE;
                let x = c * s;
                let wide = std_normal_pdf(x / 5.0);
                let narrow = std_normal_pdf(x);
                c * x * (0.05 * wide / 125.0 + 0.95 * narrow)
                    / (0.05 * wide / 5.0 + 0.95 * narrow)
            }
            InnovationKind::Laplace => {
                if s == 0.0 {
                    0.0
                } else {
                    std::f64::consts::SQRT_2 * s.signum()
                }
            }
            InnovationKind::StudentT5 => 6.0 * s / (3.0 + s * s),
        }
    }

    /// Fisher information J = int psi^2 g: closed form where available,
    /// otherwise adaptive quadrature to 1e-8.
    pub fn info(&self) -> f64 {
        match self.kind {
            InnovationKind::Gaussian => 1.0,
            InnovationKind::Laplace => 2.0,
            InnovationKind::StudentT5 => 1.25,
            _ => self.integrate(|s| self.score(s) * self.score(s) * self.density(s)),
        }
    }

    /// Half-range for quadrature over the unit-variance density.
    fn quad_range(&self) -> f64 {
        match self.kind {
            InnovationKind::Gaussian => 12.0,
            InnovationKind::MixtureSymmetric => 8.0,
            InnovationKind::MixtureContaminated => 30.0,
            InnovationKind::Laplace => 30.0,
            InnovationKind::StudentT5 => 2500.0,
        }
    }

    /// Integrate f over the effective support. The range is split into
    /// geometric segments away from the origin so the adaptive rule always
    /// sees the peaked core, and the split at zero keeps kinks there (the
    /// Laplace score) harmless.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let range = self.quad_range();
        let mut acc = 0.0;
        let mut lo = 0.0;
        let mut hi = 1.0f64;
        while lo < range {
            let cap = hi.min(range);
            acc += quad::integrate(&f, lo, cap, 1e-10);
            acc += quad::integrate(&f, -cap, -lo, 1e-10);
            lo = cap;
            hi *= 4.0;
        }
        acc
    }
}
