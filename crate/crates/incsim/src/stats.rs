//! Sample statistics shared by the simulators and the analysis pipeline.

/// First four standardized sample moments.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Two-pass central moments; the sample variance uses the n-1 denominator,
/// skewness and kurtosis the plain moment ratios.
pub fn moments(xs: &[f64]) -> Moments {
    assert!(xs.len() >= 2, "need at least two samples");
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    Moments {
        mean,
        variance: m2 * n / (n - 1.0),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    }
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

/// Two-sample Kolmogorov-Smirnov statistic: the sup distance between the
/// empirical distribution functions, evaluated by a merge walk over both
/// sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let (xi, yj) = (xs[i], ys[j]);
        if xi <= yj {
            i += 1;
        }
        if yj <= xi {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    sup.max(1.0 - (i as f64 / na).min(j as f64 / nb))
}

/// Pool-adjacent-violators projection onto nondecreasing sequences
/// (least squares, equal weights).
pub fn isotonic_nondecreasing(values: &[f64]) -> Vec<f64> {
    // Each block stores (sum, count); violating neighbors merge.
    let mut sums: Vec<f64> = Vec::with_capacity(values.len());
    let mut counts: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        sums.push(v);
        counts.push(1.0);
        while sums.len() > 1 {
            let last = sums.len() - 1;
            if sums[last] / counts[last] < sums[last - 1] / counts[last - 1] {
                let s = sums.pop().unwrap();
                let c = counts.pop().unwrap();
                *sums.last_mut().unwrap() += s;
                *counts.last_mut().unwrap() += c;
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (s, c) in sums.iter().zip(&counts) {
        let level = s / c;
        for _ in 0..*c as usize {
            out.push(level);
        }
    }
    out
}

/// One element per `block` consecutive values, decimating serial dependence.
pub fn thin(xs: &[f64], block: usize) -> Vec<f64> {
    let block = block.max(1);
    xs.iter().step_by(block).copied().collect()
}

/// Mean of `cos(phi x)` with its standard error: the real part of the
/// empirical characteristic function of a (symmetrized) sample.
pub fn ecf_cos(xs: &[f64], phi: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let vals: Vec<f64> = xs.iter().map(|&x| (phi * x).cos()).collect();
    let m = mean(&vals);
    let v = variance(&vals);
    (m, (v / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments_of_symmetric_pattern() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let m = moments(&xs);
        assert_relative_eq!(m.mean, 0.0);
        assert_relative_eq!(m.variance, 2.5);
        assert_relative_eq!(m.skewness, 0.0);
        // m4 = (16+1+0+1+16)/5 = 6.8, m2 = 2, ratio 1.7.
        assert_relative_eq!(m.excess_kurtosis, 6.8 / 4.0 - 3.0);
    }

    #[test]
    fn ks_identical_samples_is_zero() {
        let xs = [0.3, -1.2, 4.5, 2.2, -0.7];
        assert_relative_eq!(ks_two_sample(&xs, &xs), 0.0);
    }

    #[test]
    fn ks_disjoint_samples_is_one() {
        let a = [0.0, 1.0, 2.0];
        let b = [10.0, 11.0];
        assert_relative_eq!(ks_two_sample(&a, &b), 1.0);
    }

    #[test]
    fn ks_interleaved_half_offset() {
        // ECDFs differ by exactly one step of the shorter sample.
        let a = [1.0, 3.0, 5.0, 7.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        assert_relative_eq!(ks_two_sample(&a, &b), 0.25);
    }

    #[test]
    fn isotonic_projects_violations_to_block_means() {
        let v = [1.0, 3.0, 2.0, 4.0];
        let out = isotonic_nondecreasing(&v);
        assert_eq!(out, vec![1.0, 2.5, 2.5, 4.0]);
        let sorted = [1.0, 2.0, 3.0];
        assert_eq!(isotonic_nondecreasing(&sorted), sorted.to_vec());
    }

    #[test]
    fn thinning_keeps_every_block_leader() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(thin(&xs, 4), vec![0.0, 4.0, 8.0]);
        assert_eq!(thin(&xs, 1).len(), 10);
    }
}
