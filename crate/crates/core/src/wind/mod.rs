//! Wind farm: rotor dynamics, engineering wake model and safe torque control.
//!
//! Each turbine is a single-state rotor, `d omega/dt = (P/omega - T_g)/J_r`,
//! where the aerodynamic power follows a tabulated performance coefficient.
//! Turbines in the same column shade each other through steady-state wake
//! deficits combined by root-sum-square. Generator torque tracks a per-turbine
//! power setpoint and is filtered through a tip-speed-ratio barrier plus
//! actuator bounds; all three constraints are affine in torque, so the filter
//! is a scalar projection.

mod farm;
mod params;
mod turbine;
mod wake;

pub use farm::{init_omegas_at_lambda, FarmMeasurement, FarmStepResult, WindFarm};
pub use params::{
    default_cp_points, default_ct_points, PowerCurve, TurbineParams, WindControllerParams,
};
pub use turbine::{aero_power, farm_available_power, torque_nominal, torque_safe, TorqueDecision};
pub use wake::{axial_induction, effective_wind_field, wake_deficit, FarmLayout};

use crate::sim::SimError;

/// Errors from the wind subsystem.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WindError {
    /// Wind speed at or below zero has no tip-speed ratio.
    #[error("non-positive wind speed {u} m/s")]
    NonPositiveWind { u: f64 },

    /// Thrust coefficient outside [0, 1): the axial induction would be
    /// complex or the rotor fully stalled.
    #[error("thrust coefficient {ct} outside [0, 1)")]
    CtOutOfRange { ct: f64 },

    /// Parameter or layout validation failure.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    #[error(transparent)]
    Sim(#[from] SimError),
}
