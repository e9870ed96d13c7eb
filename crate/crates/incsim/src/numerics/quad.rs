//! Adaptive Simpson quadrature on finite and semi-infinite intervals.

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Classic adaptive Simpson with the |S_fine - S_coarse|/15 error estimate and
/// Richardson correction. Smooth integrands converge quickly; integrable kinks
/// are handled by subdivision, just more slowly.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    adapt(&f, a, b, fa, fm, fb, whole, tol, 52)
}

/// Integrates `f` over `[a, +inf)` to absolute tolerance `tol`.
///
/// Uses the substitution `x = a + t/(1-t)` mapping the tail onto `[0, 1)`;
/// the integrand must decay fast enough that `f(x) / (1-t)^2 -> 0`, which
/// holds for everything integrated here (exponential or power tails with
/// finite integral).
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let om = 1.0 - t;
            let x = a + t / om;
            let v = f(x) / (om * om);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-12);
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn gaussian_tail_matches_sqrt_pi() {
        let v = integrate_to_inf(|x| (-x * x).exp(), 0.0, 1e-12);
        assert_relative_eq!(v, core::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-11);
    }

    #[test]
    fn exponential_tail_from_offset() {
        let v = integrate_to_inf(|x| (-x).exp(), 2.0, 1e-13);
        assert_relative_eq!(v, (-2.0f64).exp(), max_relative = 1e-11);
    }

    #[test]
    fn sqrt_kink_converges() {
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-11);
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn oscillatory_integrand() {
        let v = integrate(|x| x.sin(), 0.0, core::f64::consts::PI, 1e-12);
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
    }
}
