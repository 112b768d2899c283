//! Aerodynamic power, the tracking torque law and its safety filter.

use crate::sim::{intersect_halfplanes, project_to_interval, Halfplane, SimError};

use super::{TurbineParams, WindControllerParams, WindError};

/// Aerodynamic power captured by the rotor:
/// `P = 0.5 * rho * A_r * cp(lambda) * u^3` with `lambda = r_r * omega / u`.
pub fn aero_power(p: &TurbineParams, u_eff: f64, omega: f64) -> Result<f64, WindError> {
    if !(u_eff > 0.0) || !u_eff.is_finite() {
        return Err(WindError::NonPositiveWind { u: u_eff });
    }
    let lambda = p.r_r * omega / u_eff;
    Ok(0.5 * p.rho * p.a_r * p.cp.value(lambda) * u_eff.powi(3))
}

/// Tracking torque: drives the power error `e = P - p_setpoint` to zero.
///
/// `T* = 2*e*J_r*k / (rho*A_r*r_r*u^2) + P/omega`. The gain `k` stands in for
/// the inverse slope of the performance curve; with the true inverse slope
/// the closed loop is `de/dt = -e`.
pub fn torque_nominal(
    p: &TurbineParams,
    ctrl: &WindControllerParams,
    omega: f64,
    u_eff: f64,
    p_setpoint: f64,
) -> Result<f64, WindError> {
    debug_assert!(omega > 0.0, "rotor speed must be positive, got {omega}");
    let power = aero_power(p, u_eff, omega)?;
    let e = power - p_setpoint;
    Ok(2.0 * e * p.j_r * ctrl.k / (p.rho * p.a_r * p.r_r * u_eff * u_eff) + power / omega)
}

/// Outcome of the torque safety filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueDecision {
    pub torque: f64,
    /// True when the constraint set was empty and the fallback (maximum
    /// braking torque) was applied.
    pub infeasible: bool,
}

/// Filter the tracking torque through the tip-speed-ratio barrier and the
/// actuator box `0 <= T_g <= tg_max`.
///
/// The barrier function is `b = lambda_barrier - r_r*omega/u`; its decrease
/// condition `db/dt + c_w*b >= 0` is affine in torque:
/// `-(r_r/(u*J_r)) * (P/omega - T_g) + c_w*b >= 0`.
/// An empty constraint set (holding the barrier would demand more torque than
/// the actuator has) falls back to maximum braking, `T_g = tg_max`.
pub fn torque_safe(
    p: &TurbineParams,
    ctrl: &WindControllerParams,
    omega: f64,
    u_eff: f64,
    p_setpoint: f64,
) -> Result<TorqueDecision, WindError> {
    let t_star = torque_nominal(p, ctrl, omega, u_eff, p_setpoint)?;
    let power = aero_power(p, u_eff, omega)?;

    let g = p.r_r / (u_eff * p.j_r); // positive
    let b_lambda = ctrl.lambda_barrier - p.r_r * omega / u_eff;
    let rows = [
        Halfplane {
            a: 1.0,
            b: p.tg_max,
        },
        Halfplane { a: -1.0, b: 0.0 },
        // -g*(P/omega - T) + c_w*b >= 0  rearranged to  -g*T <= -g*P/omega + c_w*b
        Halfplane {
            a: -g,
            b: -g * power / omega + ctrl.c_w * b_lambda,
        },
    ];

    match project_to_interval(t_star, intersect_halfplanes(&rows)) {
        Ok(torque) => Ok(TorqueDecision {
            torque,
            infeasible: false,
        }),
        Err(SimError::EmptyFeasibleSet { .. }) => Ok(TorqueDecision {
            torque: p.tg_max,
            infeasible: true,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Free-stream estimate of farm power available for dispatch:
/// `n * min(0.5*rho*A_r*cp_max*u^3, rated)`. Deliberately wake-ignorant; the
/// supervisor treats it as an upper bound, not a promise.
pub fn farm_available_power(p: &TurbineParams, n_turbines: usize, u_inf: f64) -> f64 {
    assert!(u_inf >= 0.0 && u_inf.is_finite(), "wind speed {u_inf}");
    let aero = 0.5 * p.rho * p.a_r * p.cp.max_value() * u_inf.powi(3);
    n_turbines as f64 * aero.min(p.rated_power)
}
