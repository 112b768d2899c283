//! Shared numerical substrate: the scalar constrained projection used by the
//! safety filters, a fixed-step RK4 integrator, timestamped exogenous
//! signals, and piecewise-linear lookup tables.

mod integrate;
mod qp;
mod signal;
mod table;

pub use integrate::integrate_step;
pub use qp::{intersect_halfplanes, project_to_interval, Halfplane, Interval};
pub use signal::{sample_signal, sample_signal_with, Interpolation, SignalSeries};
pub use table::PiecewiseLinear;

/// Errors from the numerical substrate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    /// The intersection of the constraint rows is empty. Carries the
    /// conflicting bounds so callers can apply their fallback policy.
    #[error("empty feasible set: lower bound {lo} exceeds upper bound {hi}")]
    EmptyFeasibleSet { lo: f64, hi: f64 },

    /// A derivative evaluation produced NaN or an infinity.
    #[error("non-finite derivative in RK4 stage {stage}, state component {component}")]
    NonFiniteDerivative { stage: usize, component: usize },

    /// A signal was sampled outside its timestamp span.
    #[error("sample time {t} s outside signal span [{first} s, {last} s]")]
    OutOfRange { t: f64, first: f64, last: f64 },

    /// A signal or table failed construction-time validation.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },
}
