//! Evenly spaced sample paths.

use crate::error::Error;

/// A real-valued path sampled on a uniform time grid with spacing `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    dt: f64,
}

impl TimeSeries {
    /// Wraps a value vector with its grid spacing, checking basic sanity:
    /// finite positive `dt`, at least two points, finite values.
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self, Error> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be finite and positive, got {dt}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a series needs at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "series contains a non-finite value {bad}"
            )));
        }
        Ok(Self { values, dt })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
