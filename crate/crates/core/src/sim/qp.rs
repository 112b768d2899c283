//! Scalar constrained projection.
//!
//! Every safety filter in this plant reduces to the same problem: minimize
//! `(u - u_nominal)^2` over one decision variable subject to affine rows
//! `a*u <= b`. The feasible set is an interval, so the minimizer is a clamp.
//! Emptiness is reported as a value rather than handled here; the fallback
//! policy belongs to the subsystem that owns the actuator.

use super::SimError;

/// One affine constraint row `a * u <= b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfplane {
    pub a: f64,
    pub b: f64,
}

impl Halfplane {
    /// Signed slack `b - a*u`; feasible iff nonnegative.
    pub fn slack(&self, u: f64) -> f64 {
        self.b - self.a * u
    }
}

/// A closed interval of the real line, possibly unbounded on either side.
/// Empty iff `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// The whole real line.
    pub const ALL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, u: f64) -> bool {
        self.lo <= u && u <= self.hi
    }
}

/// Intersect constraint rows into a single interval.
///
/// Rows with `a = 0` carry no dependence on `u`: they are vacuous when
/// `b >= 0` and make the set empty when `b < 0`. Coefficients must be finite.
pub fn intersect_halfplanes(rows: &[Halfplane]) -> Interval {
    let mut iv = Interval::ALL;
    for row in rows {
        debug_assert!(row.a.is_finite() && row.b.is_finite(), "non-finite row");
        if row.a > 0.0 {
            iv.hi = iv.hi.min(row.b / row.a);
        } else if row.a < 0.0 {
            iv.lo = iv.lo.max(row.b / row.a);
        } else if row.b < 0.0 {
            // 0*u <= b < 0 is unsatisfiable.
            return Interval {
                lo: f64::INFINITY,
                hi: f64::NEG_INFINITY,
            };
        }
    }
    iv
}

/// Minimize `(u - u_star)^2` over the interval: clamp.
///
/// Returns [`SimError::EmptyFeasibleSet`] when the interval is empty so the
/// caller can apply its own infeasibility policy.
pub fn project_to_interval(u_star: f64, feasible: Interval) -> Result<f64, SimError> {
    if feasible.is_empty() {
        return Err(SimError::EmptyFeasibleSet {
            lo: feasible.lo,
            hi: feasible.hi,
        });
    }
    Ok(u_star.clamp(feasible.lo, feasible.hi))
}
