//! One plant step of the pack: tracking, filtering and integration.

use super::cell::{cell_derivatives, cell_outputs, current_control_nominal, safety_rows};
use super::{BatteryError, BatteryParams, CellState};
use crate::sim::{integrate_step, intersect_halfplanes, project_to_interval, SimError};

/// The current-rate loop closes at `k_ic` per second, far faster than any
/// plant step worth running, so the step integrates internally at this
/// resolution (the rate is held between inner steps).
const INNER_DT_MAX: f64 = 0.025;

/// Per-step health and audit numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// Largest |i dv/dt| seen at any inner update, watts per second.
    pub max_abs_iv_dot: f64,
    /// Smallest tracking-loop decay rate seen, 1/s.
    pub min_gain: f64,
    /// Per-cell power error at the end of the step, watts.
    pub cell_power_error_w: f64,
    /// Largest unmatched drift term |i (dv - actuated part)| seen, watts/s.
    pub disturbance_sup_w: f64,
    /// Net charge moved into the cell over the step, coulombs.
    pub charge_delta_c: f64,
    /// Some inner update had an empty constraint set.
    pub infeasible: bool,
    /// Some inner update ran with decay rate at or below 1/2.
    pub gain_low: bool,
}

/// Result of advancing the pack by one plant step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryStepResult {
    pub state: CellState,
    /// Pack power at the end state, supervisory convention (positive =
    /// discharging).
    pub delivered_w: f64,
    pub diag: StepDiagnostics,
}

/// Advance the pack by `dt` while tracking `p_set_w` (positive = discharge).
///
/// The setpoint is converted to the internal charge-positive convention and
/// divided evenly across cells. Inner updates recompute the nominal rate,
/// filter it through the safety rows and hold it for one inner interval. An
/// empty constraint set is not an error: the rate falls back to the midpoint
/// of the violated bound pair and the step reports it.
pub fn battery_step(
    p: &BatteryParams,
    state: &CellState,
    p_set_w: f64,
    dt: f64,
) -> Result<BatteryStepResult, BatteryError> {
    assert!(dt > 0.0, "battery step needs positive dt");
    let p_cell_sp = -p_set_w / p.cell_count();
    let n_inner = (dt / INNER_DT_MAX).ceil().max(1.0) as usize;
    let dt_inner = dt / n_inner as f64;

    let mut s = *state;
    let mut diag = StepDiagnostics {
        max_abs_iv_dot: 0.0,
        min_gain: f64::INFINITY,
        cell_power_error_w: 0.0,
        disturbance_sup_w: 0.0,
        charge_delta_c: 0.0,
        infeasible: false,
        gain_low: false,
    };

    for _ in 0..n_inner {
        let out = cell_outputs(p, &s);
        let e_cell = out.p_cell - p_cell_sp;
        let nu_star = current_control_nominal(p, out.v, s.i_c, e_cell)?;
        let rows = safety_rows(p, &s);
        let feasible = intersect_halfplanes(&rows);
        let nu = match project_to_interval(nu_star, feasible) {
            Ok(nu) => nu,
            Err(SimError::EmptyFeasibleSet { lo, hi }) => {
                diag.infeasible = true;
                0.5 * (lo + hi)
            }
            Err(e) => return Err(e.into()),
        };

        let gain = p.k_ic * out.v / (out.v + p.r_e * s.i_c);
        diag.min_gain = diag.min_gain.min(gain);
        if gain <= 0.5 {
            diag.gain_low = true;
        }

        // dv = OCV' dz - r0 nu - du1 + dh; the actuated part is -r0 nu (and
        // the r_e model of it), the rest is drift the tracking loop absorbs.
        let d = cell_derivatives(p, &s, nu);
        let drift = p.ocv.slope(s.z) * d[1] - d[0] + d[2];
        let v_dot = drift - p.r0 * nu;
        diag.max_abs_iv_dot = diag.max_abs_iv_dot.max((s.i_c * v_dot).abs());
        diag.disturbance_sup_w = diag.disturbance_sup_w.max((s.i_c * drift).abs());

        let z_before = s.z;
        let next = integrate_step(
            &[s.u1, s.z, s.h, s.i_c],
            |st| {
                let cs = CellState {
                    u1: st[0],
                    z: st[1],
                    h: st[2],
                    i_c: st[3],
                };
                cell_derivatives(p, &cs, nu)
            },
            dt_inner,
        )?;
        s = CellState {
            u1: next[0],
            z: next[1],
            h: next[2],
            i_c: next[3],
        };
        // dz/dt is proportional to i with a constant coefficient, so the
        // charge integral follows exactly from the charge change.
        diag.charge_delta_c += (s.z - z_before) / p.soc_rate_per_amp();
    }

    let out_end = cell_outputs(p, &s);
    diag.cell_power_error_w = out_end.p_cell - p_cell_sp;
    Ok(BatteryStepResult {
        state: s,
        delivered_w: -out_end.p_pack,
        diag,
    })
}
