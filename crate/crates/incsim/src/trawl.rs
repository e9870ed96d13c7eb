//! Trawl processes `X_t = L(A_t)`: set geometry, autodependence, exact
//! cumulant formulas, and grid simulation.
//!
//! The trawl set is `A = {(s, x): s <= 0, 0 <= x <= h(s)}` for an increasing
//! height profile `h`, and `A_t` is `A` translated by `t` in time. The path
//! is simulated by partitioning a truncated copy of `A` into independent
//! Levy cells and summing, per output time, the cells whose centers fall in
//! the translated set.
//!
//! Cells are one time column wide and variable in height: the top of the
//! column is split exactly at the heights where cell-center membership
//! changes from one output to the next, and the tail below is split
//! geometrically so that no cell is taller than a few percent of its height.
//! Exact splits keep short-lag increments sharp; the geometric tail keeps the
//! cell count affordable for long-memory sets, where equal-height rows would
//! either blow the budget or lose tail area.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::LevySeed;
use crate::error::Error;
use crate::exec;
use crate::gaussian::CorrelationFunction;
use crate::rng::{base_rng, domain, unit_rng};
use crate::timeseries::TimeSeries;

/// Monotone-height trawl set `A = {(s, x): s <= 0, 0 <= x <= h(s)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrawlSet {
    /// `h(s) = exp(lambda s)`; area `1/lambda`, autodependence `exp(-lambda u)`.
    Exponential { lambda: f64 },
    /// `h(s) = (1 + lambda |s|)^(-nu)` with `nu > 1`; area `1/(lambda (nu-1))`,
    /// autodependence `(1 + lambda u)^(1-nu)`.
    Power { lambda: f64, nu: f64 },
}

impl TrawlSet {
    pub fn validate(&self) -> Result<(), Error> {
        let ok = match *self {
            TrawlSet::Exponential { lambda } => lambda > 0.0 && lambda.is_finite(),
            TrawlSet::Power { lambda, nu } => {
                lambda > 0.0 && lambda.is_finite() && nu > 1.0 && nu.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid trawl set {self:?}")))
        }
    }

    /// Lebesgue measure `|A|`.
    pub fn area(&self) -> f64 {
        match *self {
            TrawlSet::Exponential { lambda } => 1.0 / lambda,
            TrawlSet::Power { lambda, nu } => 1.0 / (lambda * (nu - 1.0)),
        }
    }

    /// Height profile `h(s)` for `s <= 0`.
    pub fn height(&self, s: f64) -> f64 {
        match *self {
            TrawlSet::Exponential { lambda } => (lambda * s).exp(),
            TrawlSet::Power { lambda, nu } => (1.0 + lambda * s.abs()).powf(-nu),
        }
    }

    /// Inverse of the height profile: the `s <= 0` with `h(s) = y`, `y` in `(0, 1]`.
    fn height_inverse(&self, y: f64) -> f64 {
        match *self {
            TrawlSet::Exponential { lambda } => y.ln() / lambda,
            TrawlSet::Power { lambda, nu } => -(y.powf(-1.0 / nu) - 1.0) / lambda,
        }
    }

    /// Autodependence `r(u) = |A intersect A_u| / |A|`.
    pub fn autodependence(&self, u: f64) -> f64 {
        match *self {
            TrawlSet::Exponential { lambda } => (-lambda * u).exp(),
            TrawlSet::Power { lambda, nu } => (1.0 + lambda * u).powf(1.0 - nu),
        }
    }

    /// The unique `u >= 0` with `autodependence(u) = target`, `target` in `(0, 1]`.
    pub fn autodependence_invert(&self, target: f64) -> Result<f64, Error> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::TargetOutOfRange {
                target,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let u = match *self {
            TrawlSet::Exponential { lambda } => -target.ln() / lambda,
            TrawlSet::Power { lambda, nu } => (target.powf(-1.0 / (nu - 1.0)) - 1.0) / lambda,
        };
        Ok(u)
    }

    /// Time span `T` such that the area beyond `s = -T` is at most
    /// `(eps/2) |A|`.
    fn truncation_span(&self, eps: f64) -> f64 {
        match *self {
            TrawlSet::Exponential { lambda } => (2.0 / eps).ln() / lambda,
            TrawlSet::Power { lambda, nu } => ((2.0 / eps).powf(1.0 / (nu - 1.0)) - 1.0) / lambda,
        }
    }

    /// The trawl set realizing a correlation function as its autodependence,
    /// if one exists in the supported families.
    pub fn from_correlation(r: &CorrelationFunction) -> Result<TrawlSet, Error> {
        r.validate()?;
        match *r {
            CorrelationFunction::Exponential { lambda } => Ok(TrawlSet::Exponential { lambda }),
            CorrelationFunction::PowerDecay { lambda, nu } => Ok(TrawlSet::Power {
                lambda,
                nu: nu + 1.0,
            }),
            CorrelationFunction::StretchedExponential { .. } => Err(Error::InvalidParameter(
                "no monotone-height trawl set has a stretched-exponential autodependence".into(),
            )),
        }
    }
}

fn default_truncation_eps() -> f64 {
    1e-6
}

fn default_cell_budget() -> f64 {
    1e4
}

/// A trawl process: set geometry, driving seed, and discretization controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrawlProcessSpec {
    pub set: TrawlSet,
    pub seed: LevySeed,
    /// Sampling step, which is also the cell width in time.
    pub dt: f64,
    /// Relative area the truncation may discard (default 1e-6).
    #[serde(default = "default_truncation_eps")]
    pub truncation_eps: f64,
    /// Target number of cells per unit of trawl area (default 1e4); bounds
    /// the cell area from above by `|A| / cell_budget`.
    #[serde(default = "default_cell_budget")]
    pub cell_budget: f64,
}

impl TrawlProcessSpec {
    /// Spec with the default truncation and cell budget.
    pub fn new(set: TrawlSet, seed: LevySeed, dt: f64) -> Self {
        TrawlProcessSpec {
            set,
            seed,
            dt,
            truncation_eps: default_truncation_eps(),
            cell_budget: default_cell_budget(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.set.validate()?;
        self.seed.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sampling step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.truncation_eps > 0.0 && self.truncation_eps < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "truncation_eps must lie in (0, 0.5), got {}",
                self.truncation_eps
            )));
        }
        if !(self.cell_budget >= 10.0) || !self.cell_budget.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cell_budget must be at least 10, got {}",
                self.cell_budget
            )));
        }
        Ok(())
    }
}

/// Hard cap on the number of cells in the truncated trawl.
const CELL_CAP: u64 = 100_000_000;
/// Columns processed per parallel work item; fixed so output is independent
/// of thread count.
const COLUMN_CHUNK: usize = 4096;

/// One vertical cell of a time column: `area` is its Lebesgue measure and
/// `ages` the number of consecutive outputs whose translated set contains
/// its center (ages `1..=ages` counting from the cell's own column).
#[derive(Debug, Clone, Copy)]
struct Band {
    area: f64,
    ages: usize,
}

/// The per-column cell partition; identical for every column by stationarity.
#[derive(Debug)]
struct TrawlMesh {
    /// Bands ordered bottom-up, so `ages` is nonincreasing.
    bands: Vec<Band>,
    /// Number of age levels: columns this far back still contribute.
    ages_max: usize,
}

impl TrawlMesh {
    /// Total cell count of the truncated trawl.
    fn cells(&self) -> u64 {
        self.bands.iter().map(|b| b.ages as u64).sum()
    }

    /// Discretized set measure: sum of cell areas weighted by their ages.
    fn measure(&self) -> f64 {
        self.bands.iter().map(|b| b.area * b.ages as f64).sum()
    }

    /// Discretized overlap measure at a lag of `k` whole columns.
    fn overlap(&self, k: usize) -> f64 {
        self.bands
            .iter()
            .map(|b| b.area * b.ages.saturating_sub(k) as f64)
            .sum()
    }
}

fn build_mesh(set: &TrawlSet, dt: f64, eps: f64, budget: f64) -> Result<TrawlMesh, Error> {
    let area = set.area();
    let span = set.truncation_span(eps);
    let ages_max = ((span / dt + 0.5).floor() as u64).max(1);
    if ages_max > CELL_CAP {
        return Err(Error::ResourceLimit(format!(
            "truncated trawl spans {ages_max} columns, exceeding the {CELL_CAP}-cell cap; \
             increase dt or truncation_eps"
        )));
    }
    let ages_max = ages_max as usize;
    let y_min = set.height(-span);
    let threshold = |m: usize| set.height((0.5 - m as f64) * dt);

    // Heights at which a cell center crosses from age m to age m+1. Splitting
    // exactly at these makes the top cells' membership exact; the split stays
    // exact while the thresholds are farther apart than a quarter of the
    // target cell width.
    let w_cap = area / budget / dt;
    let min_exact = ages_max.min(2);
    let mut boundaries = vec![threshold(1)];
    let mut m_x = 1usize;
    while m_x < ages_max {
        let top = boundaries[boundaries.len() - 1];
        let next = threshold(m_x + 1);
        if m_x >= min_exact && top - next < 0.25 * w_cap {
            break;
        }
        boundaries.push(next);
        m_x += 1;
        if boundaries.len() as u64 * 2 > CELL_CAP / (m_x as u64).max(1) {
            return Err(Error::ResourceLimit(format!(
                "trawl mesh exceeds the {CELL_CAP}-cell cap; increase dt, truncation_eps, \
                 or lower cell_budget"
            )));
        }
    }

    // Geometric continuation down to the truncation height.
    let mut y = boundaries[boundaries.len() - 1];
    if y > y_min {
        let ratio = 1.0 - (w_cap / y).min(0.02);
        loop {
            y *= ratio;
            if y <= y_min {
                boundaries.push(y_min);
                break;
            }
            boundaries.push(y);
            if boundaries.len() > 2_000_000 {
                return Err(Error::ResourceLimit(format!(
                    "trawl mesh exceeds the {CELL_CAP}-cell cap; increase dt, truncation_eps, \
                     or lower cell_budget"
                )));
            }
        }
    }
    if boundaries.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "sampling step {dt} is too coarse for this trawl set: the truncated set \
             spans less than one cell"
        )));
    }

    let mut bands: Vec<Band> = boundaries
        .windows(2)
        .filter_map(|w| {
            let (top, bottom) = (w[0], w[1]);
            let width = top - bottom;
            if width <= 0.0 {
                return None;
            }
            let center = 0.5 * (top + bottom);
            let ages = (0.5 - set.height_inverse(center) / dt).floor() as usize;
            Some(Band {
                area: width * dt,
                ages: ages.clamp(1, ages_max),
            })
        })
        .collect();
    bands.reverse();

    let mesh = TrawlMesh { bands, ages_max };
    if mesh.cells() > CELL_CAP {
        return Err(Error::ResourceLimit(format!(
            "truncated trawl spans {} cells, exceeding the {CELL_CAP}-cell cap; \
             increase dt or truncation_eps, or lower cell_budget",
            mesh.cells()
        )));
    }
    Ok(mesh)
}

/// Samples the trawl path at `0, dt, ..., (n-1) dt`.
///
/// Every cell value is drawn from a per-column counter-based stream, and
/// partial sums are merged in a fixed chunk order, so the output is a pure
/// function of `(spec, n, seed)` regardless of thread count.
pub fn simulate_trawl(spec: &TrawlProcessSpec, n: usize, seed: u64) -> Result<TimeSeries, Error> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let mesh = build_mesh(&spec.set, spec.dt, spec.truncation_eps, spec.cell_budget)?;
    let ages = mesh.ages_max as i64;
    let n_i = n as i64;
    let n_cols = n + mesh.ages_max - 1;
    let j_min = 1 - ages;
    let sampler = spec.seed.area_sampler();
    let base = base_rng(seed, domain::TRAWL_CELLS, 0);

    let chunk_count = n_cols.div_ceil(COLUMN_CHUNK);
    let parts: Vec<(usize, Vec<f64>)> = exec::map_indexed(chunk_count, |ci| {
        let k0 = ci * COLUMN_CHUNK;
        let len = COLUMN_CHUNK.min(n_cols - k0);
        let out_lo = (j_min + k0 as i64).max(0);
        let out_hi = (j_min + (k0 + len - 1) as i64 + ages - 1).min(n_i - 1);
        let mut local = vec![0.0f64; (out_hi - out_lo + 2) as usize];
        for k in k0..k0 + len {
            let j = j_min + k as i64;
            let mut rng = unit_rng(&base, k as u64);
            for band in &mesh.bands {
                let end = j + band.ages as i64 - 1;
                if end < 0 {
                    // Bands are ordered by nonincreasing age: none of the
                    // remaining ones reach the output window either.
                    break;
                }
                let value = sampler.draw(band.area, &mut rng);
                let start = j.max(0);
                let end = end.min(n_i - 1);
                local[(start - out_lo) as usize] += value;
                local[(end + 1 - out_lo) as usize] -= value;
            }
        }
        (out_lo as usize, local)
    });

    let mut diff = vec![0.0f64; n + 1];
    for (lo, local) in &parts {
        for (t, v) in local.iter().enumerate() {
            diff[lo + t] += v;
        }
    }
    let mut values = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &d in diff.iter().take(n) {
        acc += d;
        values.push(acc);
    }
    TimeSeries::new(values, spec.dt)
}

/// Dependence index of the discretized path at a lag of `lag_steps` columns:
/// the cell-weighted overlap fraction actually realized on the grid. It
/// converges to `autodependence(lag_steps * dt)` as the mesh refines.
pub fn discrete_autodependence(spec: &TrawlProcessSpec, lag_steps: usize) -> Result<f64, Error> {
    spec.validate()?;
    let mesh = build_mesh(&spec.set, spec.dt, spec.truncation_eps, spec.cell_budget)?;
    Ok(mesh.overlap(lag_steps) / mesh.measure())
}

/// `log E exp(i phi (X_{t+u} - X_t)) = |A| (1 - r(u)) (C(phi) + C(-phi))`
/// where `C` is the seed cumulant per unit area.
pub fn trawl_increment_cumulant(spec: &TrawlProcessSpec, phi: f64, u: f64) -> Complex64 {
    let area = spec.set.area();
    let r = spec.set.autodependence(u);
    (spec.seed.cumulant(phi) + spec.seed.cumulant(-phi)) * (area * (1.0 - r))
}

/// `log E exp(i (phi X_t + psi X_{t+u}))`, splitting the plane into the two
/// private regions and the overlap:
/// `|A \ A_u| C(phi) + |A intersect A_u| C(phi + psi) + |A_u \ A| C(psi)`.
pub fn trawl_joint_cumulant(spec: &TrawlProcessSpec, phi: f64, psi: f64, u: f64) -> Complex64 {
    let area = spec.set.area();
    let r = spec.set.autodependence(u);
    let private = area * (1.0 - r);
    let shared = area * r;
    (spec.seed.cumulant(phi) + spec.seed.cumulant(psi)) * private
        + spec.seed.cumulant(phi + psi) * shared
}
