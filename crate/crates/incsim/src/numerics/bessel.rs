//! Log-gamma and the modified Bessel function K1.
//!
//! K1 appears in every NIG density evaluation, so it must be fast and good to
//! near machine precision: the density's quadrature checks run at 1e-8 and the
//! published 7-digit polynomial approximations are not accurate enough. Below
//! the crossover the convergent ascending series is used; above it, a
//! Chebyshev expansion of the scaled function in 1/x, fitted once at first use
//! against the integral representation
//! `K1(z) e^z sqrt(z) = 2 Int_0^inf s^2 exp(-s^2) sqrt(2 + s^2/z) ds`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::quad;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CROSSOVER: f64 = 3.0;

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // Reflection keeps the series argument away from zero.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = 0.999_999_999_999_809_93;
    for (i, c) in COEF.iter().enumerate() {
        acc += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(x: f64) -> f64 {
    bessel_k1_scaled(x) * (-x).exp()
}

/// `K1(x) * exp(x)`, stable for large arguments.
pub fn bessel_k1_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "K1 requires x > 0, got {x}");
    if x <= SERIES_CROSSOVER {
        k1_series(x) * x.exp()
    } else {
        k1_scaled_cheb(x)
    }
}

/// Ascending series: `K1(x) = ln(x/2) I1(x) + 1/x - (x/4) sum_k
/// [psi(k+1) + psi(k+2)] / (k! (k+1)!) (x^2/4)^k`.
fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    // I1 and the psi-weighted sum share the same term ladder.
    let mut i1_term = 0.5 * x;
    let mut i1 = i1_term;
    let mut psi_a = -EULER_GAMMA; // psi(1)
    let mut psi_b = 1.0 - EULER_GAMMA; // psi(2)
    let mut sum_term = psi_a + psi_b;
    let mut sum = sum_term;
    let mut k = 1.0f64;
    loop {
        i1_term *= q / (k * (k + 1.0));
        i1 += i1_term;
        psi_a += 1.0 / k;
        psi_b += 1.0 / (k + 1.0);
        let w = q.powi(k as i32) / (factorial(k) * factorial(k + 1.0));
        sum_term = (psi_a + psi_b) * w;
        sum += sum_term;
        if sum_term.abs() < 1e-18 * sum.abs() && i1_term.abs() < 1e-18 * i1.abs() {
            break;
        }
        k += 1.0;
        debug_assert!(k < 60.0);
    }
    (0.5 * x).ln() * i1 + 1.0 / x - 0.25 * x * sum
}

fn factorial(n: f64) -> f64 {
    let mut acc = 1.0;
    let mut i = 2.0;
    while i <= n {
        acc *= i;
        i += 1.0;
    }
    acc
}

/// Chebyshev evaluation of `K1(x) e^x` for `x > 3` via `t = crossover / x`.
fn k1_scaled_cheb(x: f64) -> f64 {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    let coeffs = COEFFS.get_or_init(build_cheb_coeffs);
    let t = SERIES_CROSSOVER / x;
    // Clenshaw on [0, 1] mapped to [-1, 1].
    let xi = 2.0 * t - 1.0;
    let two_xi = 2.0 * xi;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs[1..].iter().rev() {
        let tmp = two_xi * b1 - b2 + c;
        b2 = b1;
        b1 = tmp;
    }
    let series = xi * b1 - b2 + 0.5 * coeffs[0];
    series / x.sqrt()
}

/// Fits `g(t) = K1(3/t) e^{3/t} sqrt(3/t)` on `t in [0, 1]` at Chebyshev
/// nodes, evaluating g by adaptive quadrature of the smooth substituted
/// integral representation.
fn build_cheb_coeffs() -> Vec<f64> {
    const N: usize = 48;
    let g = |t: f64| {
        // z = 3/t; t = 0 is the z -> inf limit where the sqrt factor is sqrt(2).
        quad::integrate(
            |s| {
                let s2 = s * s;
                2.0 * s2 * (-s2).exp() * (2.0 + s2 * t / SERIES_CROSSOVER).sqrt()
            },
            0.0,
            8.0,
            1e-15,
        )
    };
    let mut samples = Vec::with_capacity(N);
    for k in 0..N {
        let xi = ((k as f64 + 0.5) * PI / N as f64).cos();
        let t = 0.5 * (xi + 1.0);
        samples.push(g(t));
    }
    let mut coeffs = vec![0.0; N];
    for (j, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, s) in samples.iter().enumerate() {
            acc += s * ((j as f64) * (k as f64 + 0.5) * PI / N as f64).cos();
        }
        *c = 2.0 * acc / N as f64;
    }
    // Trailing coefficients below noise contribute nothing but Clenshaw work.
    let cutoff = 1e-17 * coeffs[0].abs();
    let keep = coeffs
        .iter()
        .rposition(|c| c.abs() > cutoff)
        .map_or(N, |p| p + 1);
    coeffs.truncate(keep.max(8));
    coeffs
}
