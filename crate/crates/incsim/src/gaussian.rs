//! Stationary Gaussian processes with mean 0, variance 1, and a positive,
//! strictly decreasing correlation function, sampled by circulant embedding.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::{base_rng, domain};
use crate::timeseries::TimeSeries;

/// Correlation function of a unit-variance stationary Gaussian process.
///
/// All variants are positive, continuous, and strictly decreasing from
/// `r(0) = 1` to 0, so each is invertible on `(0, 1]`. `PowerDecay` with
/// `nu <= 1` has a non-integrable correlation (long memory); it is allowed,
/// but such processes mix slowly and need long paths for stable statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationFunction {
    /// `r(u) = exp(-lambda u)`
    Exponential { lambda: f64 },
    /// `r(u) = exp(-(lambda u)^kappa)` with `kappa` in `(0, 1]`
    StretchedExponential { lambda: f64, kappa: f64 },
    /// `r(u) = (1 + lambda u)^(-nu)`
    PowerDecay { lambda: f64, nu: f64 },
}

impl CorrelationFunction {
    pub fn validate(&self) -> Result<(), Error> {
        let ok = match *self {
            CorrelationFunction::Exponential { lambda } => lambda > 0.0 && lambda.is_finite(),
            CorrelationFunction::StretchedExponential { lambda, kappa } => {
                lambda > 0.0 && lambda.is_finite() && kappa > 0.0 && kappa <= 1.0
            }
            CorrelationFunction::PowerDecay { lambda, nu } => {
                lambda > 0.0 && lambda.is_finite() && nu > 0.0 && nu.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid correlation function {self:?}"
            )))
        }
    }

    /// `r(u)` for `u >= 0`.
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            CorrelationFunction::Exponential { lambda } => (-lambda * u).exp(),
            CorrelationFunction::StretchedExponential { lambda, kappa } => {
                (-(lambda * u).powf(kappa)).exp()
            }
            CorrelationFunction::PowerDecay { lambda, nu } => (1.0 + lambda * u).powf(-nu),
        }
    }

    /// The unique `u >= 0` with `r(u) = target`, for `target` in `(0, 1]`.
    pub fn invert(&self, target: f64) -> Result<f64, Error> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::TargetOutOfRange {
                target,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let u = match *self {
            CorrelationFunction::Exponential { lambda } => -target.ln() / lambda,
            CorrelationFunction::StretchedExponential { lambda, kappa } => {
                (-target.ln()).powf(1.0 / kappa) / lambda
            }
            CorrelationFunction::PowerDecay { lambda, nu } => {
                (target.powf(-1.0 / nu) - 1.0) / lambda
            }
        };
        Ok(u)
    }
}

/// `Var(X_{t+u} - X_t) = 2 (1 - r(u))` for a unit-variance stationary process.
pub fn increment_variance(r: &CorrelationFunction, u: f64) -> f64 {
    2.0 * (1.0 - r.eval(u))
}

/// Longest series the dense Cholesky fallback will attempt.
const CHOLESKY_MAX: usize = 10_000;

/// Samples a stationary Gaussian path with the exact target covariance on the
/// grid `0, dt, ..., (n-1) dt`.
///
/// The covariance sequence is embedded in a circulant whose eigenvalues are
/// obtained by FFT; tiny negative eigenvalues are clamped, and the padding
/// doubles (up to 16n) until the embedding is nonnegative. If no embedding
/// works the path falls back to dense Cholesky factorization with a small
/// diagonal jitter, which is only feasible for short series.
pub fn simulate_gaussian(
    r: &CorrelationFunction,
    n: usize,
    dt: f64,
    seed: u64,
) -> Result<TimeSeries, Error> {
    r.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sampling step must be positive, got {dt}"
        )));
    }

    let min_pad = (2 * n).next_power_of_two();
    let mut m = min_pad;
    while m <= 8 * min_pad {
        if let Some(eigs) = embedding_eigenvalues(&|j| r.eval(j as f64 * dt), m) {
            let values = sample_from_eigenvalues(&eigs, n, seed);
            return TimeSeries::new(values, dt);
        }
        m *= 2;
    }

    if n > CHOLESKY_MAX {
        return Err(Error::EmbeddingFailure {
            n,
            max_len: CHOLESKY_MAX,
        });
    }
    let values = cholesky_sample(&|j| r.eval(j as f64 * dt), n, seed)?;
    TimeSeries::new(values, dt)
}

/// Eigenvalues of the order-`m` circulant embedding of the covariance
/// sequence `cov(j)`, or `None` if any eigenvalue is too negative to clamp.
fn embedding_eigenvalues(cov: &dyn Fn(usize) -> f64, m: usize) -> Option<Vec<f64>> {
    let half = m / 2;
    let mut buf: Vec<Complex64> = (0..m)
        .map(|j| {
            let lag = j.min(m - j).min(half);
            Complex64::new(cov(lag), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mut eigs: Vec<f64> = buf.iter().map(|z| z.re).collect();
    let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-8 * max.max(1.0);
    for lam in &mut eigs {
        if *lam < -tol {
            return None;
        }
        *lam = lam.max(0.0);
    }
    Some(eigs)
}

/// Draws one path of length `n` given the circulant eigenvalues: a Hermitian
/// complex-Gaussian spectrum is shaped by `sqrt(eigenvalue)` and transformed
/// back, and the first `n` samples are the stationary path.
fn sample_from_eigenvalues(eigs: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let m = eigs.len();
    let half = m / 2;
    let mut rng = base_rng(seed, domain::GAUSSIAN_NOISE, 0);
    let inv_m = 1.0 / m as f64;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); m];
    let z: f64 = rng.sample(StandardNormal);
    spectrum[0] = Complex64::new((eigs[0] * inv_m).sqrt() * z, 0.0);
    for k in 1..half {
        let sigma = (eigs[k] * inv_m * 0.5).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        spectrum[k] = Complex64::new(sigma * re, sigma * im);
        spectrum[m - k] = spectrum[k].conj();
    }
    let z: f64 = rng.sample(StandardNormal);
    spectrum[half] = Complex64::new((eigs[half] * inv_m).sqrt() * z, 0.0);

    FftPlanner::new().plan_fft_forward(m).process(&mut spectrum);
    spectrum.truncate(n);
    spectrum.iter().map(|z| z.re).collect()
}

/// Dense-covariance fallback: factor the Toeplitz covariance and color an
/// i.i.d. normal vector. Jitter is added to the diagonal if needed.
fn cholesky_sample(cov: &dyn Fn(usize) -> f64, n: usize, seed: u64) -> Result<Vec<f64>, Error> {
    let mut factor = None;
    for jitter in [0.0, 1e-14, 1e-12, 1e-10] {
        if let Some(l) = cholesky_factor(cov, n, jitter) {
            factor = Some(l);
            break;
        }
    }
    let l = factor.ok_or_else(|| {
        Error::Numerical("covariance matrix is not positive definite even with jitter".into())
    })?;
    let mut rng = base_rng(seed, domain::GAUSSIAN_NOISE, 1);
    let z: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let row = &l[i * n..i * n + i + 1];
        out[i] = row.iter().zip(&z).map(|(a, b)| a * b).sum();
    }
    Ok(out)
}

/// Lower-triangular Cholesky factor of the Toeplitz matrix `cov(|i-j|)`
/// plus `jitter` on the diagonal; `None` if a pivot is not positive.
fn cholesky_factor(cov: &dyn Fn(usize) -> f64, n: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = cov(i - j) + if i == j { jitter } else { 0.0 };
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}
