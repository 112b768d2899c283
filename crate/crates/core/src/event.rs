//! Diagnostic events raised by the safety filters.
//!
//! Filter infeasibility is not an error: each subsystem has a documented
//! fallback input and the run continues. Events exist so that runs can be
//! audited afterwards.

use serde::{Deserialize, Serialize};

/// What happened and where.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    /// The torque constraint set of one turbine was empty; torque was clamped
    /// to the actuator maximum (maximum braking).
    WindQpInfeasible,
    /// The battery current-rate constraint set was empty; the rate was set to
    /// the midpoint of the violated bound pair.
    BatteryQpInfeasible,
    /// The battery tracking-gain margin `A > 1/2` failed at some instant.
    BatteryGainMarginLow,
}

/// A single diagnostic occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Simulation time in seconds at which the triggering control update ran.
    pub time_s: f64,
    pub kind: EventKind,
    /// Turbine index for wind events; 0 for battery events.
    pub unit: usize,
}
