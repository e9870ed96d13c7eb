//! Nelder-Mead simplex minimization for likelihood refinement.

/// Outcome of a simplex minimization.
#[derive(Debug, Clone)]
pub struct MinResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`, with per-coordinate initial steps.
///
/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Terminates when the simplex function values agree to
/// `rel_tol` relatively or after `max_iter` iterations.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    steps: &[f64],
    max_iter: usize,
    rel_tol: f64,
) -> MinResult {
    let dim = x0.len();
    assert_eq!(dim, steps.len());
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // Order best -> worst.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = (values[worst] - values[best]).abs();
        let scale = values[best].abs().max(values[worst].abs()).max(1e-12);
        if spread <= rel_tol * scale {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (idx, v) in simplex.iter().enumerate() {
            if idx != worst {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / dim as f64;
                }
            }
        }

        let at = |alpha: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + alpha * (c - w))
                .collect()
        };

        let reflected = at(1.0);
        let fr = f(&reflected);
        if fr < values[best] {
            let expanded = at(2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = if fr < values[worst] { at(0.5) } else { at(-0.5) };
            let fc = f(&contracted);
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let best_point = simplex[best].clone();
                for (idx, v) in simplex.iter_mut().enumerate() {
                    if idx != best {
                        for (x, b) in v.iter_mut().zip(&best_point) {
                            *x = b + 0.5 * (*x - b);
                        }
                        values[idx] = f(v);
                    }
                }
            }
        }
    }

    let (arg_best, &value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("simplex nonempty");
    MinResult {
        x: simplex[arg_best].clone(),
        value,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_bowl_minimum() {
        let res = nelder_mead(
            |x| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2),
            &[0.0, 0.0],
            &[0.5, 0.5],
            500,
            1e-12,
        );
        assert!(res.converged);
        assert_relative_eq!(res.x[0], 1.5, epsilon = 1e-5);
        assert_relative_eq!(res.x[1], -0.5, epsilon = 1e-5);
    }

    #[test]
    fn rosenbrock_reaches_valley() {
        let res = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.3, 0.3],
            2000,
            1e-14,
        );
        assert!(res.value < 1e-8);
    }
}
