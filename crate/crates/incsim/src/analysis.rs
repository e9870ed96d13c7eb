//! Empirical pipeline for comparing increment laws across datasets.
//!
//! The workflow: standardize each series to unit variance, tabulate increment
//! variance (or a fractional moment) against lag, match lags across datasets
//! by inverting the monotone-smoothed tables at common target levels, then
//! measure how well the increment densities collapse at the matched lags with
//! a thinned two-sample KS statistic and an L1 distance between log-density
//! estimates. Everything here is deterministic on its inputs, so reports and
//! their CSV payloads are byte-identical across reruns.

use serde::{Deserialize, Serialize};

use crate::distributions::{nig_fit, NigParams};
use crate::error::Error;
use crate::lss::fractional_moment;
use crate::stats;
use crate::timeseries::TimeSeries;

/// Default relative tolerance on the pairing statistic at matched lags.
pub const DEFAULT_MATCH_TOL: f64 = 0.01;

/// Divides by the sample standard deviation so the output has unit sample
/// variance. The mean is kept: increments are translation invariant, so
/// centering would change nothing downstream while destroying the level.
pub fn standardize(ts: &TimeSeries) -> Result<TimeSeries, Error> {
    let var = stats::variance(ts.values());
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::DegenerateSeries { variance: var });
    }
    let sd = var.sqrt();
    let values: Vec<f64> = ts.values().iter().map(|v| v / sd).collect();
    TimeSeries::new(values, ts.dt())
}

/// The full overlapping-increment sample `{v[k + lag] - v[k]}`.
pub fn increments(ts: &TimeSeries, lag_steps: usize) -> Result<Vec<f64>, Error> {
    let n = ts.len();
    if lag_steps == 0 || lag_steps >= n {
        return Err(Error::LagTooLarge {
            lag_steps,
            len: n,
        });
    }
    let vals = ts.values();
    Ok((0..n - lag_steps)
        .map(|i| vals[i + lag_steps] - vals[i])
        .collect())
}

/// Per-lag increment statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagStats {
    /// Lag in time units (`steps * dt`).
    pub lag: f64,
    pub steps: usize,
    pub variance: f64,
    /// Mean of `|increment|^p` when a fractional order was requested.
    pub frac_moment: Option<f64>,
    /// Number of overlapping increments behind the entry.
    pub count: usize,
}

/// Increment statistics on a lag grid, with a monotone-smoothed copy of the
/// pairing statistic retained for inversion.
#[derive(Debug, Clone, Serialize)]
pub struct LagTable {
    pub dt: f64,
    pub entries: Vec<LagStats>,
    /// Fractional-moment order; when set, that column is the pairing
    /// statistic instead of the variance.
    pub p_frac: Option<f64>,
    /// Isotonic regression of the pairing statistic over the grid. Raw
    /// tables can carry small non-monotonic noise; inversion uses this copy.
    pub smoothed: Vec<f64>,
}

impl LagTable {
    /// Assembles a table from precomputed entries, enforcing the grid and
    /// sign invariants and building the smoothed copy.
    pub fn new(dt: f64, entries: Vec<LagStats>, p_frac: Option<f64>) -> Result<LagTable, Error> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty lag table".into()));
        }
        for pair in entries.windows(2) {
            if pair[1].lag <= pair[0].lag {
                return Err(Error::InvalidParameter(format!(
                    "lags must be strictly increasing, got {} then {}",
                    pair[0].lag, pair[1].lag
                )));
            }
        }
        for e in &entries {
            if !(e.lag > 0.0) || e.variance < 0.0 || !e.variance.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "lag {} with variance {} is not admissible",
                    e.lag, e.variance
                )));
            }
            if p_frac.is_some() && e.frac_moment.is_none() {
                return Err(Error::InvalidParameter(
                    "fractional order set but a row has no fractional moment".into(),
                ));
            }
        }
        let raw: Vec<f64> = entries
            .iter()
            .map(|e| match p_frac {
                Some(_) => e.frac_moment.unwrap(),
                None => e.variance,
            })
            .collect();
        let smoothed = stats::isotonic_nondecreasing(&raw);
        Ok(LagTable {
            dt,
            entries,
            p_frac,
            smoothed,
        })
    }

    /// Attainable interval of the smoothed pairing statistic.
    pub fn stat_range(&self) -> (f64, f64) {
        (self.smoothed[0], *self.smoothed.last().unwrap())
    }

    /// Smoothed pairing statistic at lag `u`, piecewise linear in log-lag,
    /// clamped to the endpoints outside the grid.
    fn eval_smoothed(&self, u: f64) -> f64 {
        let lags = &self.entries;
        if u <= lags[0].lag {
            return self.smoothed[0];
        }
        if u >= lags[lags.len() - 1].lag {
            return *self.smoothed.last().unwrap();
        }
        let idx = lags.partition_point(|e| e.lag < u);
        let (u0, u1) = (lags[idx - 1].lag.ln(), lags[idx].lag.ln());
        let w = (u.ln() - u0) / (u1 - u0);
        self.smoothed[idx - 1] + w * (self.smoothed[idx] - self.smoothed[idx - 1])
    }

    /// Continuous lag whose smoothed statistic equals `target`, by inverse
    /// piecewise-linear interpolation in log-lag.
    fn invert_stat(&self, target: f64) -> Option<f64> {
        let (lo, hi) = self.stat_range();
        if target < lo || target > hi {
            return None;
        }
        let idx = self.smoothed.partition_point(|&v| v < target);
        Some(if idx == 0 {
            self.entries[0].lag
        } else {
            let (v0, v1) = (self.smoothed[idx - 1], self.smoothed[idx]);
            if v1 == v0 {
                self.entries[idx - 1].lag
            } else {
                let w = (target - v0) / (v1 - v0);
                let (l0, l1) = (self.entries[idx - 1].lag.ln(), self.entries[idx].lag.ln());
                (l0 + w * (l1 - l0)).exp()
            }
        })
    }
}

/// Tabulates increment variance (and optionally the fractional moment of
/// order `p_frac`) over `lags`, given in time units and rounded to the
/// sampling grid. `None` selects the dyadic default `dt, 2 dt, 4 dt, ...`
/// up to a quarter of the series length.
pub fn variance_by_lag(
    ts: &TimeSeries,
    lags: Option<&[f64]>,
    p_frac: Option<f64>,
) -> Result<LagTable, Error> {
    if let Some(p) = p_frac {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fractional order must be positive, got {p}"
            )));
        }
    }
    let n = ts.len();
    let steps: Vec<usize> = match lags {
        None => {
            let mut k = 1usize;
            let mut out = Vec::new();
            while k <= n / 4 {
                out.push(k);
                k *= 2;
            }
            out
        }
        Some(grid) => {
            if grid.is_empty() {
                return Err(Error::InvalidParameter("empty lag grid".into()));
            }
            for pair in grid.windows(2) {
                if pair[1] <= pair[0] {
                    return Err(Error::InvalidParameter(
                        "lag grid must be strictly increasing".into(),
                    ));
                }
            }
            let mut out: Vec<usize> = Vec::with_capacity(grid.len());
            for &u in grid {
                if !(u > 0.0) || !u.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "lags must be positive, got {u}"
                    )));
                }
                let k = ((u / ts.dt()).round() as usize).max(1);
                if out.last() != Some(&k) {
                    out.push(k);
                }
            }
            out
        }
    };
    let mut entries = Vec::with_capacity(steps.len());
    for &k in &steps {
        if k + 2 > n {
            return Err(Error::LagTooLarge {
                lag_steps: k,
                len: n,
            });
        }
        let inc = increments(ts, k)?;
        entries.push(LagStats {
            lag: k as f64 * ts.dt(),
            steps: k,
            variance: stats::variance(&inc),
            frac_moment: p_frac.map(|p| fractional_moment(&inc, p)),
            count: inc.len(),
        });
    }
    LagTable::new(ts.dt(), entries, p_frac)
}

/// One matched target level across a dataset pair. `lag_*` are the realized
/// lags `steps_* * dt`; `stat_*` is the smoothed pairing statistic at the
/// interpolated (continuous) matched lag, which attains the target by
/// construction, so `|stat_a - stat_b| / stat_a` sits within the matching
/// tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct MatchedLag {
    pub target: f64,
    pub steps_a: usize,
    pub lag_a: f64,
    pub stat_a: f64,
    pub steps_b: usize,
    pub lag_b: f64,
    pub stat_b: f64,
}

/// Finds, for each target level, the lag in each table whose pairing
/// statistic attains the target, by monotone interpolation in log-lag.
/// Realized lags are rounded to each table's sampling grid; the achieved
/// statistics stay within [`DEFAULT_MATCH_TOL`] of the target.
pub fn match_lags(a: &LagTable, b: &LagTable, targets: &[f64]) -> Result<Vec<MatchedLag>, Error> {
    match_lags_tol(a, b, targets, DEFAULT_MATCH_TOL)
}

/// [`match_lags`] with an explicit relative tolerance.
pub fn match_lags_tol(
    a: &LagTable,
    b: &LagTable,
    targets: &[f64],
    rel_tol: f64,
) -> Result<Vec<MatchedLag>, Error> {
    if a.p_frac != b.p_frac {
        return Err(Error::InvalidParameter(format!(
            "tables pair different statistics ({:?} vs {:?})",
            a.p_frac, b.p_frac
        )));
    }
    let (lo_a, hi_a) = a.stat_range();
    let (lo_b, hi_b) = b.stat_range();
    let (lo, hi) = (lo_a.max(lo_b), hi_a.min(hi_b));
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        if !(target >= lo && target <= hi) {
            return Err(Error::TargetOutOfRange { target, lo, hi });
        }
        let u_a = a.invert_stat(target).unwrap();
        let u_b = b.invert_stat(target).unwrap();
        let (stat_a, stat_b) = (a.eval_smoothed(u_a), b.eval_smoothed(u_b));
        for (side, stat) in [("first", stat_a), ("second", stat_b)] {
            if (stat - target).abs() > rel_tol * target.abs() {
                return Err(Error::Numerical(format!(
                    "{side} table attains only {stat} at its matched lag for \
                     target {target} (tolerance {rel_tol})"
                )));
            }
        }
        let steps_a = ((u_a / a.dt).round() as usize).max(1);
        let steps_b = ((u_b / b.dt).round() as usize).max(1);
        out.push(MatchedLag {
            target,
            steps_a,
            lag_a: steps_a as f64 * a.dt,
            stat_a,
            steps_b,
            lag_b: steps_b as f64 * b.dt,
            stat_b,
        });
    }
    Ok(out)
}

/// Histogram-based log-density estimate on a symmetric support.
#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate {
    /// Centers of the nonempty bins only; empty bins are absent rather than
    /// carried as minus infinity.
    pub centers: Vec<f64>,
    pub log_density: Vec<f64>,
    /// Samples inside the support, i.e. the normalization count.
    pub samples_used: usize,
    pub bin_width: f64,
}

/// Log of a normalized histogram on the symmetric range spanned by the
/// 0.9999 quantile of `|x|`, with `bins` equal-width bins. Exponentials of
/// the values integrate to 1 over the nonempty bins by construction.
pub fn density_log(samples: &[f64], bins: usize) -> Result<DensityEstimate, Error> {
    if bins == 0 || samples.len() < 10 * bins {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot support {bins} bins (need 10 per bin)",
            samples.len()
        )));
    }
    let half = abs_quantile(samples, 0.9999);
    if !(half > 0.0) || !half.is_finite() {
        return Err(Error::InvalidParameter(
            "samples have no spread to bin".into(),
        ));
    }
    density_log_on_range(samples, bins, half)
}

/// Nearest-rank quantile of `|x|`.
fn abs_quantile(samples: &[f64], q: f64) -> f64 {
    let mut mags: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
    mags.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let idx = ((samples.len() as f64 * q).ceil() as usize)
        .clamp(1, samples.len())
        - 1;
    mags[idx]
}

fn density_log_on_range(samples: &[f64], bins: usize, half: f64) -> Result<DensityEstimate, Error> {
    let width = 2.0 * half / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut used = 0usize;
    for &x in samples {
        if x.abs() > half {
            continue;
        }
        let b = (((x + half) / width) as usize).min(bins - 1);
        counts[b] += 1;
        used += 1;
    }
    if used == 0 {
        return Err(Error::InvalidParameter(
            "no samples inside the binning range".into(),
        ));
    }
    let mut centers = Vec::new();
    let mut log_density = Vec::new();
    for (b, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        centers.push(-half + (b as f64 + 0.5) * width);
        log_density.push((c as f64 / (used as f64 * width)).ln());
    }
    Ok(DensityEstimate {
        centers,
        log_density,
        samples_used: used,
        bin_width: width,
    })
}

/// Distances between two increment samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CollapseDistance {
    /// Two-sample Kolmogorov-Smirnov statistic on block-thinned samples.
    pub ks: f64,
    /// Mean absolute log-density gap over bins populated by both samples,
    /// estimated on a shared symmetric grid from the full samples.
    pub l1_logdensity: f64,
}

/// Compares two samples: KS on thinned copies (`thinning` gives the block
/// length for each side, decimating serial dependence inside the test
/// statistic only), and an L1 log-density distance on common bins.
pub fn collapse_distance(
    a: &[f64],
    b: &[f64],
    thinning: (usize, usize),
) -> Result<CollapseDistance, Error> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter(
            "both samples must be nonempty".into(),
        ));
    }
    let ks = stats::ks_two_sample(&stats::thin(a, thinning.0), &stats::thin(b, thinning.1));
    let bins = (a.len().min(b.len()) / 10).clamp(4, 64);
    let half = abs_quantile(a, 0.9999).max(abs_quantile(b, 0.9999));
    if !(half > 0.0) || !half.is_finite() {
        // Both samples concentrated at zero: identical in law as far as a
        // histogram can tell.
        return Ok(CollapseDistance {
            ks,
            l1_logdensity: 0.0,
        });
    }
    let da = density_log_on_range(a, bins, half)?;
    let db = density_log_on_range(b, bins, half)?;
    let mut gap = 0.0;
    let mut common = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < da.centers.len() && j < db.centers.len() {
        let (ca, cb) = (da.centers[i], db.centers[j]);
        if (ca - cb).abs() < 0.5 * da.bin_width {
            gap += (da.log_density[i] - db.log_density[j]).abs();
            common += 1;
            i += 1;
            j += 1;
        } else if ca < cb {
            i += 1;
        } else {
            j += 1;
        }
    }
    let l1 = if common == 0 {
        f64::INFINITY
    } else {
        gap / common as f64
    };
    Ok(CollapseDistance {
        ks,
        l1_logdensity: l1,
    })
}

/// Configuration for [`is_report`].
#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    /// Pairing statistic: variance when `None`, else the fractional moment
    /// of this order.
    pub p_frac: Option<f64>,
    /// Size of the default geometric target ladder when no explicit targets
    /// are passed.
    pub n_targets: usize,
    /// Relative tolerance on the pairing statistic at matched lags.
    pub match_tol: f64,
    /// Bins for the per-target density CSV.
    pub bins: usize,
    /// KS thinning block as a multiple of the lag, per side.
    pub thinning_factor: usize,
    /// Fit NIG parameters to each matched increment sample.
    pub fit_nig: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            p_frac: None,
            n_targets: 12,
            match_tol: DEFAULT_MATCH_TOL,
            bins: 64,
            thinning_factor: 2,
            fit_nig: true,
        }
    }
}

/// One dataset pair at one target level, fully measured.
#[derive(Debug, Clone, Serialize)]
pub struct PairTargetMatch {
    /// Index of the dataset paired against dataset 0.
    pub dataset: usize,
    pub matched: MatchedLag,
    pub ks: f64,
    pub l1_logdensity: f64,
    /// NIG fits of the two increment samples; absent when fitting was
    /// disabled or infeasible (a failure note records why).
    pub nig_a: Option<NigParams>,
    pub nig_b: Option<NigParams>,
}

/// Plot-ready density overlay for one target level:
/// `dataset,lag,bin_center,log_density` rows.
#[derive(Debug, Clone, Serialize)]
pub struct TargetCsv {
    pub target: f64,
    pub csv: String,
}

/// Full cross-dataset comparison report.
#[derive(Debug, Clone, Serialize)]
pub struct MatchResult {
    /// Target levels of the pairing statistic, as used.
    pub targets: Vec<f64>,
    pub pairs: Vec<PairTargetMatch>,
    /// Notes for every pair or target that could not be completed; the
    /// remaining results are still valid.
    pub failures: Vec<String>,
    pub csv_by_target: Vec<TargetCsv>,
}

/// Runs the full pipeline over `datasets`: standardize, tabulate, match every
/// later dataset against the first at each target level, and measure the
/// collapse of the matched increment samples. `targets` of `None` selects a
/// geometric ladder of `config.n_targets` levels spanning the common range of
/// the smoothed tables. Failures of individual pairs or targets become notes;
/// the report retains everything that succeeded.
pub fn is_report(
    datasets: &[TimeSeries],
    targets: Option<&[f64]>,
    config: &ReportConfig,
) -> Result<MatchResult, Error> {
    if datasets.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 datasets, got {}",
            datasets.len()
        )));
    }
    if config.n_targets == 0 || config.match_tol <= 0.0 || config.bins == 0 {
        return Err(Error::InvalidParameter(
            "targets, tolerance, and bins must all be positive".into(),
        ));
    }
    let mut failures: Vec<String> = Vec::new();

    let base = standardize(&datasets[0])?;
    let base_table = variance_by_lag(&base, None, config.p_frac)?;

    let mut others: Vec<Option<(TimeSeries, LagTable)>> = Vec::new();
    for (j, ds) in datasets.iter().enumerate().skip(1) {
        match standardize(ds).and_then(|s| {
            let t = variance_by_lag(&s, None, config.p_frac)?;
            Ok((s, t))
        }) {
            Ok(pair) => others.push(Some(pair)),
            Err(e) => {
                failures.push(format!("dataset {j}: {e}"));
                others.push(None);
            }
        }
    }

    let targets: Vec<f64> = match targets {
        Some(t) => {
            if t.is_empty() {
                return Err(Error::InvalidParameter("empty target list".into()));
            }
            t.to_vec()
        }
        None => {
            let (mut lo, mut hi) = base_table.stat_range();
            for pair in others.iter().flatten() {
                let (l, h) = pair.1.stat_range();
                lo = lo.max(l);
                hi = hi.min(h);
            }
            if !(hi > lo) {
                return Err(Error::OutOfRange(format!(
                    "tables share no statistic range (lo {lo} >= hi {hi})"
                )));
            }
            let m = config.n_targets;
            (0..m)
                .map(|k| {
                    let w = (k + 1) as f64 / (m + 1) as f64;
                    (lo.ln() + w * (hi.ln() - lo.ln())).exp()
                })
                .collect()
        }
    };

    let mut pairs: Vec<PairTargetMatch> = Vec::new();
    for (slot, j) in others.iter().zip(1..) {
        let Some((series, table)) = slot else {
            continue;
        };
        for &target in &targets {
            let matched =
                match match_lags_tol(&base_table, table, &[target], config.match_tol) {
                    Ok(mut v) => v.pop().unwrap(),
                    Err(e) => {
                        failures.push(format!("pair (0, {j}) target {target}: {e}"));
                        continue;
                    }
                };
            let inc_a = increments(&base, matched.steps_a)?;
            let inc_b = increments(series, matched.steps_b)?;
            let dist = collapse_distance(
                &inc_a,
                &inc_b,
                (
                    config.thinning_factor * matched.steps_a,
                    config.thinning_factor * matched.steps_b,
                ),
            )?;
            let mut fit = |inc: &[f64], side: &str| -> Option<NigParams> {
                if !config.fit_nig {
                    return None;
                }
                match nig_fit(inc) {
                    Ok(f) => Some(f.params),
                    Err(e) => {
                        failures.push(format!(
                            "pair (0, {j}) target {target} {side} sample: {e}"
                        ));
                        None
                    }
                }
            };
            let nig_a = fit(&inc_a, "first");
            let nig_b = fit(&inc_b, "second");
            pairs.push(PairTargetMatch {
                dataset: j,
                matched,
                ks: dist.ks,
                l1_logdensity: dist.l1_logdensity,
                nig_a,
                nig_b,
            });
        }
    }

    let mut csv_by_target = Vec::with_capacity(targets.len());
    for &target in &targets {
        let mut csv = String::from("dataset,lag,bin_center,log_density\n");
        let mut wrote_base = false;
        for p in pairs.iter().filter(|p| p.matched.target == target) {
            if !wrote_base {
                append_density_rows(&mut csv, 0, p.matched.lag_a, &base, p.matched.steps_a, config)?;
                wrote_base = true;
            }
            let (series, _) = others[p.dataset - 1].as_ref().unwrap();
            append_density_rows(&mut csv, p.dataset, p.matched.lag_b, series, p.matched.steps_b, config)?;
        }
        csv_by_target.push(TargetCsv { target, csv });
    }

    Ok(MatchResult {
        targets,
        pairs,
        failures,
        csv_by_target,
    })
}

fn append_density_rows(
    csv: &mut String,
    dataset: usize,
    lag: f64,
    series: &TimeSeries,
    steps: usize,
    config: &ReportConfig,
) -> Result<(), Error> {
    use std::fmt::Write;
    let inc = increments(series, steps)?;
    let dens = density_log(&inc, config.bins.min(inc.len() / 10).max(1))?;
    for (c, ld) in dens.centers.iter().zip(&dens.log_density) {
        writeln!(csv, "{dataset},{lag},{c},{ld}").expect("string write");
    }
    Ok(())
}
