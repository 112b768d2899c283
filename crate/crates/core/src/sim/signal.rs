//! Timestamped exogenous signals (wind speed, irradiance, demand).
//!
//! Sampling is zero-order hold by default: the value at time `t` is the value
//! of the most recent sample at or before `t`, so the signal is
//! right-continuous and piecewise constant. Linear interpolation is available
//! behind a config switch but is not the tested default.

use serde::{Deserialize, Serialize};

use super::SimError;

/// How to read a signal between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Hold the most recent sample (right-continuous step function).
    #[default]
    Zoh,
    /// Straight line between neighbouring samples.
    Linear,
}

/// A non-empty series of (time, value) samples with strictly increasing
/// timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SignalSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, SimError> {
        if times.is_empty() {
            return Err(SimError::Invalid {
                what: "signal",
                why: "no samples".into(),
            });
        }
        if times.len() != values.len() {
            return Err(SimError::Invalid {
                what: "signal",
                why: format!("{} timestamps but {} values", times.len(), values.len()),
            });
        }
        for pair in times.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(SimError::Invalid {
                    what: "signal",
                    why: format!("timestamps not strictly increasing at t={}", pair[1]),
                });
            }
        }
        for (t, v) in times.iter().zip(&values) {
            if !t.is_finite() || !v.is_finite() {
                return Err(SimError::Invalid {
                    what: "signal",
                    why: format!("non-finite sample at t={t}"),
                });
            }
        }
        Ok(Self { times, values })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, SimError> {
        let (times, values) = pairs.into_iter().unzip();
        Self::new(times, values)
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one sample
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Index of the most recent sample at or before `t`.
    fn index_at(&self, t: f64) -> Result<usize, SimError> {
        if t < self.first_time() || t > self.last_time() {
            return Err(SimError::OutOfRange {
                t,
                first: self.first_time(),
                last: self.last_time(),
            });
        }
        // partition_point returns the count of samples with time <= t; that
        // count is >= 1 because t >= first_time.
        Ok(self.times.partition_point(|&ts| ts <= t) - 1)
    }
}

/// Zero-order-hold sample: value of the most recent sample at or before `t`.
pub fn sample_signal(series: &SignalSeries, t: f64) -> Result<f64, SimError> {
    sample_signal_with(series, t, Interpolation::Zoh)
}

/// Sample with an explicit interpolation mode.
pub fn sample_signal_with(
    series: &SignalSeries,
    t: f64,
    mode: Interpolation,
) -> Result<f64, SimError> {
    let i = series.index_at(t)?;
    match mode {
        Interpolation::Zoh => Ok(series.values[i]),
        Interpolation::Linear => {
            if i + 1 == series.len() {
                return Ok(series.values[i]);
            }
            let (t0, t1) = (series.times[i], series.times[i + 1]);
            let (v0, v1) = (series.values[i], series.values[i + 1]);
            Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
        }
    }
}
