//! Cell dynamics, terminal quantities, the nominal current-rate controller
//! and the safety rows it is filtered through.

use super::{BatteryError, BatteryParams};
use crate::sim::Halfplane;
use serde::{Deserialize, Serialize};

/// Dynamic state of the representative cell.
///
/// Current is a state, not an input: the actuator sets the current *rate*,
/// which is what the safety filter constrains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    /// Diffusion branch voltage, volts.
    pub u1: f64,
    /// State of charge, fraction of capacity.
    pub z: f64,
    /// Hysteresis voltage, volts.
    pub h: f64,
    /// Cell current, amperes; positive charges the cell.
    pub i_c: f64,
}

impl CellState {
    /// Rested cell at the given state of charge.
    pub fn at_soc(z: f64) -> Self {
        CellState {
            u1: 0.0,
            z,
            h: 0.0,
            i_c: 0.0,
        }
    }
}

/// Terminal quantities derived from one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOutputs {
    /// Terminal voltage of one cell, volts.
    pub v: f64,
    /// Electrical power of one cell, watts; positive while charging.
    pub p_cell: f64,
    /// Pack power, watts; positive while charging.
    pub p_pack: f64,
}

/// Terminal voltage, cell power and pack power at a state.
pub fn cell_outputs(p: &BatteryParams, s: &CellState) -> CellOutputs {
    let v = p.ocv.voltage(s.z) - p.r0 * s.i_c - s.u1 + s.h;
    let p_cell = v * s.i_c;
    CellOutputs {
        v,
        p_cell,
        p_pack: p.cell_count() * p_cell,
    }
}

/// Pack power in the supervisory convention: positive = discharging into the
/// grid.
pub fn delivered_power_w(p: &BatteryParams, s: &CellState) -> f64 {
    -cell_outputs(p, s).p_pack
}

/// Right-hand side of the cell dynamics for a held current rate `nu`.
///
/// State order: `[u1, z, h, i_c]`.
pub fn cell_derivatives(p: &BatteryParams, s: &CellState, nu: f64) -> [f64; 4] {
    let du1 = -s.u1 / (p.r1 * p.c1) + s.i_c / p.c1;
    let dz = p.soc_rate_per_amp() * s.i_c;
    // The hysteresis voltage relaxes toward -sign(i)*M at a rate set by the
    // charge throughput; it freezes when no current flows.
    let kappa = p.g_hyst * dz.abs();
    let dh = -kappa * (s.h + s.i_c.signum() * p.m_hyst);
    [du1, dz, dh, nu]
}

/// Nominal current rate that drives the per-cell power error to zero.
///
/// Differentiating `p = v i` along the dynamics and keeping the actuated
/// part gives `dp = (v + r_e i) nu + slow terms`; cancelling at gain `k_ic`
/// yields an error decay rate of `k_ic v / (v + r_e i)`.
pub fn current_control_nominal(
    p: &BatteryParams,
    v: f64,
    i_c: f64,
    e_cell: f64,
) -> Result<f64, BatteryError> {
    let denom = v + p.r_e * i_c;
    if !(denom > 0.0) {
        return Err(BatteryError::DenominatorNonpositive { denom });
    }
    Ok(-p.k_ic * e_cell / denom)
}

/// The four safety rows on the current rate, as halfplanes `a nu <= b`.
///
/// Order: current floor, current ceiling, charge floor, charge ceiling. The
/// current box has relative degree one; the charge box has relative degree
/// two and uses the staged rates `c_z1`, `c_z2`.
pub fn safety_rows(p: &BatteryParams, s: &CellState) -> [Halfplane; 4] {
    let k_z = p.soc_rate_per_amp();
    let dz = k_z * s.i_c;
    let psi1_floor = dz + p.c_z1 * (s.z - p.z_min);
    let psi1_ceil = -dz + p.c_z1 * (p.z_max - s.z);
    [
        Halfplane {
            a: -1.0,
            b: p.c_ic * (s.i_c - p.i_min),
        },
        Halfplane {
            a: 1.0,
            b: p.c_ic * (p.i_max - s.i_c),
        },
        Halfplane {
            a: -k_z,
            b: p.c_z1 * dz + p.c_z2 * psi1_floor,
        },
        Halfplane {
            a: k_z,
            b: p.c_z2 * psi1_ceil - p.c_z1 * dz,
        },
    ]
}
