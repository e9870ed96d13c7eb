//! Error type shared by all modules.

use crate::distributions::NigParams;

/// Failure modes surfaced by simulation, fitting, and analysis operations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A parameter value is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Sample moments lie outside the region any NIG law can reach
    /// (`3 * excess kurtosis > 5 * skewness^2` fails). The payload carries the
    /// clamped moment-only estimate so callers can still report something.
    #[error("sample moments infeasible for a NIG fit (3k = {three_kurt:.6} <= 5s^2 = {five_skew_sq:.6})")]
    FitInfeasible {
        three_kurt: f64,
        five_skew_sq: f64,
        moment_estimate: NigParams,
    },

    /// Circulant embedding stayed indefinite through the padding ladder and
    /// the dense fallback is too large to attempt.
    #[error("no nonnegative circulant embedding up to {max_len} points and n = {n} exceeds the dense fallback limit")]
    EmbeddingFailure { n: usize, max_len: usize },

    /// A simulation request exceeds the configured work limit.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// An integral required by the requested quantity does not converge.
    #[error("divergent: {0}")]
    Divergent(String),

    /// No lag in the admissible range attains the requested target value.
    #[error("no matchable lag: {0}")]
    NotMatchable(String),

    /// The series has (numerically) zero variance, so it cannot be standardized.
    #[error("degenerate series: sample variance {variance:.3e} too small to standardize")]
    DegenerateSeries { variance: f64 },

    /// An increment lag does not leave enough increments.
    #[error("lag of {lag_steps} steps too large for a series of {len} points")]
    LagTooLarge { lag_steps: usize, len: usize },

    /// A matching target lies outside the overlap of the two lag tables.
    #[error("target {target:.6} outside the common attainable range [{lo:.6}, {hi:.6}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    /// A variogram target lies outside the identifiable range of the table.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}
