//! Seed laws for the Levy-driven constructions.
//!
//! A seed is the law of the driving basis per unit of measure: evaluating the
//! basis over a set of measure `a` scales the cumulant function by `a`. The
//! three seeds here are closed under that scaling with simple parameter maps,
//! which is what the cell simulators rely on.

mod nig;
mod stable;

pub use nig::{nig_cdf, nig_fit, nig_log_pdf, nig_pdf, nig_sample, NigFit, NigParams};
pub use stable::{stable_fractional_moment, stable_sample, StableParams};

pub(crate) use stable::sample_standard;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Law of the driving Levy basis per unit measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevySeed {
    /// Gaussian basis: value over a set of measure `a` is
    /// `N(mean * a, variance * a)`.
    Gaussian { mean: f64, variance: f64 },
    /// Normal inverse Gaussian basis; `a` scales `mu` and `delta`.
    Nig(NigParams),
    /// Symmetric alpha-stable basis with cumulant `-gamma |phi|^alpha`;
    /// `a` scales `gamma`.
    SymmetricStable(StableParams),
}

impl LevySeed {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            LevySeed::Gaussian { mean, variance } => {
                // Zero variance is allowed: a deterministic seed degenerates
                // the process to its mean surface, useful for reductions.
                if !mean.is_finite() || !variance.is_finite() || *variance < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "Gaussian seed needs finite mean and nonnegative variance, got ({mean}, {variance})"
                    )));
                }
                Ok(())
            }
            LevySeed::Nig(p) => p.validate(),
            LevySeed::SymmetricStable(p) => p.validate(),
        }
    }

    /// Log characteristic function per unit measure, `log E exp(i phi L')`.
    pub fn cumulant(&self, phi: f64) -> Complex64 {
        match self {
            LevySeed::Gaussian { mean, variance } => {
                Complex64::new(-0.5 * variance * phi * phi, mean * phi)
            }
            LevySeed::Nig(p) => p.cumulant(phi),
            LevySeed::SymmetricStable(p) => Complex64::new(p.cumulant(phi), 0.0),
        }
    }

    /// The seed whose unit-measure law equals this seed over measure `a`.
    pub fn scaled_by_area(&self, a: f64) -> LevySeed {
        match self {
            LevySeed::Gaussian { mean, variance } => LevySeed::Gaussian {
                mean: mean * a,
                variance: variance * a,
            },
            LevySeed::Nig(p) => LevySeed::Nig(p.scaled_by_area(a)),
            LevySeed::SymmetricStable(p) => LevySeed::SymmetricStable(StableParams {
                alpha: p.alpha,
                gamma: p.gamma * a,
            }),
        }
    }

    /// Mean of the basis over unit measure; `None` for the stable seed.
    pub fn mean_per_area(&self) -> Option<f64> {
        match self {
            LevySeed::Gaussian { mean, .. } => Some(*mean),
            LevySeed::Nig(p) => Some(p.mean()),
            LevySeed::SymmetricStable(_) => None,
        }
    }

    /// Variance of the basis over unit measure; `None` for the stable seed.
    pub fn variance_per_area(&self) -> Option<f64> {
        match self {
            LevySeed::Gaussian { variance, .. } => Some(*variance),
            LevySeed::Nig(p) => Some(p.variance()),
            LevySeed::SymmetricStable(_) => None,
        }
    }

    /// Whether the law is symmetric about its location.
    pub fn is_symmetric(&self) -> bool {
        match self {
            LevySeed::Gaussian { .. } => true,
            LevySeed::Nig(p) => p.beta == 0.0,
            LevySeed::SymmetricStable(_) => true,
        }
    }

    /// Prepares a cheap per-cell sampler (no per-draw validation).
    pub fn area_sampler(&self) -> AreaSampler {
        match self {
            LevySeed::Gaussian { mean, variance } => AreaSampler::Gaussian {
                mean: *mean,
                sd: variance.sqrt(),
            },
            LevySeed::Nig(p) => AreaSampler::Nig {
                ig_mean_unit: p.delta / p.gamma_bar(),
                delta: p.delta,
                beta: p.beta,
                mu: p.mu,
            },
            LevySeed::SymmetricStable(p) => AreaSampler::Stable {
                alpha: p.alpha,
                gamma: p.gamma,
            },
        }
    }
}

/// Prebaked sampler for the basis value over sets of varying measure.
#[derive(Debug, Clone, Copy)]
pub enum AreaSampler {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    Nig {
        /// delta / gamma_bar: the inverse-Gaussian mean per unit delta-scale.
        ig_mean_unit: f64,
        delta: f64,
        beta: f64,
        mu: f64,
    },
    Stable {
        alpha: f64,
        gamma: f64,
    },
}

impl AreaSampler {
    /// One draw of the basis over a set of measure `area`.
    #[inline]
    pub fn draw(&self, area: f64, rng: &mut ChaCha8Rng) -> f64 {
        use rand::Rng;
        use rand_distr::StandardNormal;
        match *self {
            AreaSampler::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean * area + sd * area.sqrt() * z
            }
            AreaSampler::Nig {
                ig_mean_unit,
                delta,
                beta,
                mu,
            } => {
                let d = delta * area;
                let z = sample_inverse_gaussian(ig_mean_unit * area, d * d, rng);
                let n: f64 = rng.sample(StandardNormal);
                mu * area + beta * z + z.sqrt() * n
            }
            AreaSampler::Stable { alpha, gamma } => {
                stable::sample_standard(alpha, rng) * (gamma * area).powf(1.0 / alpha)
            }
        }
    }
}

/// Inverse-Gaussian draw with the given mean and shape
/// (Michael-Schucany-Haas transformation).
#[inline]
pub(crate) fn sample_inverse_gaussian(mean: f64, shape: f64, rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let nu: f64 = rng.sample(StandardNormal);
    let y = nu * nu;
    // Smaller root of the quadratic, rationalized so it stays exact and
    // nonnegative even when the shape is many orders below the mean (tiny
    // cells scale the shape by area^2 but the mean only by area).
    let w = mean * y;
    let s = (w * (w + 4.0 * shape)).sqrt();
    let x = if w > 0.0 {
        4.0 * mean * shape * w / ((s + w) * (s + w))
    } else {
        0.0
    };
    let u: f64 = rng.random();
    if u <= mean / (mean + x) {
        x
    } else {
        mean * mean / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{base_rng, domain};
    use approx::assert_relative_eq;

    #[test]
    fn cumulant_conjugate_symmetry() {
        let seeds = [
            LevySeed::Gaussian {
                mean: 0.3,
                variance: 1.7,
            },
            LevySeed::Nig(NigParams {
                alpha: 2.0,
                beta: 0.9,
                mu: -0.3,
                delta: 1.7,
            }),
            LevySeed::SymmetricStable(StableParams {
                alpha: 1.5,
                gamma: 0.8,
            }),
        ];
        for seed in &seeds {
            for phi in [0.1, 0.7, 2.3] {
                let c = seed.cumulant(phi);
                let cm = seed.cumulant(-phi);
                assert_relative_eq!(c.re, cm.re, max_relative = 1e-14);
                assert_relative_eq!(c.im, -cm.im, max_relative = 1e-14);
            }
            assert_relative_eq!(seed.cumulant(0.0).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn area_scaling_multiplies_cumulant() {
        let seeds = [
            LevySeed::Gaussian {
                mean: 0.3,
                variance: 1.7,
            },
            LevySeed::Nig(NigParams {
                alpha: 2.0,
                beta: 0.9,
                mu: -0.3,
                delta: 1.7,
            }),
            LevySeed::SymmetricStable(StableParams {
                alpha: 1.2,
                gamma: 0.8,
            }),
        ];
        for seed in &seeds {
            let a = 0.37;
            let scaled = seed.scaled_by_area(a);
            for phi in [0.4, 1.3] {
                let want = seed.cumulant(phi) * a;
                let got = scaled.cumulant(phi);
                assert_relative_eq!(got.re, want.re, max_relative = 1e-12);
                assert_relative_eq!(got.im, want.im, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn inverse_gaussian_moments() {
        let mut rng = base_rng(11, domain::DIRECT_SAMPLE, 0);
        let (mean, shape) = (0.8, 1.9);
        let n = 200_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_inverse_gaussian(mean, shape, &mut rng))
            .collect();
        let m = crate::stats::moments(&xs);
        let want_var = mean.powi(3) / shape;
        assert_relative_eq!(m.mean, mean, max_relative = 0.01);
        assert_relative_eq!(m.variance, want_var, max_relative = 0.05);
    }

    #[test]
    fn gaussian_area_sampler_matches_moments() {
        let seed = LevySeed::Gaussian {
            mean: 2.0,
            variance: 3.0,
        };
        let sampler = seed.area_sampler();
        let mut rng = base_rng(5, domain::DIRECT_SAMPLE, 0);
        let area = 0.25;
        let xs: Vec<f64> = (0..100_000).map(|_| sampler.draw(area, &mut rng)).collect();
        let m = crate::stats::moments(&xs);
        assert_relative_eq!(m.mean, 0.5, epsilon = 0.02);
        assert_relative_eq!(m.variance, 0.75, max_relative = 0.03);
    }
}
