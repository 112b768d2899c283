//! Piecewise-linear lookup tables.
//!
//! Performance coefficient curves and the open-circuit-voltage curve are all
//! tabulated functions of one variable: linear between breakpoints, clamped
//! to the end values outside the tabulated range.

use super::SimError;

/// A piecewise-linear function given by at least two breakpoints with
/// strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, SimError> {
        if xs.len() < 2 {
            return Err(SimError::Invalid {
                what: "table",
                why: format!("need at least 2 breakpoints, got {}", xs.len()),
            });
        }
        if xs.len() != ys.len() {
            return Err(SimError::Invalid {
                what: "table",
                why: format!("{} abscissae but {} ordinates", xs.len(), ys.len()),
            });
        }
        for pair in xs.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(SimError::Invalid {
                    what: "table",
                    why: format!("abscissae not strictly increasing at x={}", pair[1]),
                });
            }
        }
        for (x, y) in xs.iter().zip(&ys) {
            if !x.is_finite() || !y.is_finite() {
                return Err(SimError::Invalid {
                    what: "table",
                    why: format!("non-finite breakpoint at x={x}"),
                });
            }
        }
        Ok(Self { xs, ys })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, SimError> {
        let (xs, ys) = pairs.into_iter().unzip();
        Self::new(xs, ys)
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn y_values(&self) -> &[f64] {
        &self.ys
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Evaluate; clamps to the end values outside the tabulated range.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.x_min() {
            return self.ys[0];
        }
        if x >= self.x_max() {
            return *self.ys.last().unwrap();
        }
        let i = self.xs.partition_point(|&xs| xs <= x) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Slope of the segment containing `x` (zero outside the tabulated
    /// range, where the table clamps). At interior breakpoints the slope of
    /// the right segment is returned.
    pub fn slope(&self, x: f64) -> f64 {
        if x < self.x_min() || x >= self.x_max() {
            return 0.0;
        }
        let i = self.xs.partition_point(|&xs| xs <= x) - 1;
        let i = i.min(self.xs.len() - 2);
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    /// True when ordinates strictly increase with x.
    pub fn is_strictly_increasing(&self) -> bool {
        self.ys.windows(2).all(|p| p[1] > p[0])
    }
}
