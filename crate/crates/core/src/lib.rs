//! Deterministic simulation of a hybrid power plant: a wake-coupled wind
//! farm, a first-order solar plant and a lithium-ion battery pack, each with
//! its own tracking controller and a pointwise safety filter, dispatched by a
//! rule-based supervisor against a demand signal.
//!
//! Layout:
//! - [`sim`]: shared numerical substrate (scalar QP over halfplanes, fixed
//!   step RK4, timestamped signals, piecewise-linear tables)
//! - [`wind`]: turbine rotor dynamics, engineering wake model, torque control
//!   with a tip-speed-ratio barrier
//! - [`solar`]: first-order irradiance-limited plant with PI feedback
//! - [`battery`]: equivalent-circuit cell model scaled to a pack, current-rate
//!   control with current and state-of-charge barriers
//! - [`supervisor`]: rule-based dispatch of the three subsystems
//! - [`scenario`]: config parsing, synthetic signal generation, the top-level
//!   run loop and output writers

pub mod battery;
pub mod event;
pub mod scenario;
pub mod sim;
pub mod solar;
pub mod supervisor;
pub mod wind;
