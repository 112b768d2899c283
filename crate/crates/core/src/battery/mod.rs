//! Grid-scale battery: an equivalent-circuit cell model scaled to a pack,
//! a power-tracking current-rate controller, and a safety filter that keeps
//! cell current and state of charge inside their operating boxes.
//!
//! All internal quantities use the cell sign convention: positive current
//! charges the cell. The step interface speaks the supervisory convention
//! instead (positive power = discharge into the grid) and negates on the way
//! in and out.

mod cell;
mod params;
mod step;

pub use cell::{
    cell_derivatives, cell_outputs, current_control_nominal, delivered_power_w, safety_rows,
    CellOutputs, CellState,
};
pub use params::{cells_per_dimension, default_ocv_points, BatteryParams, OcvCurve};
pub use step::{battery_step, BatteryStepResult, StepDiagnostics};

use crate::sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BatteryError {
    /// The power-to-current linearization `v + r_e i` lost its sign; the
    /// tracking controller has no usable gain direction there.
    #[error("control denominator v + r_e*i = {denom} is not positive")]
    DenominatorNonpositive { denom: f64 },
    #[error("invalid battery parameter {what}: {why}")]
    Invalid {
        what: &'static str,
        why: &'static str,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
}
