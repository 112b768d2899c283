//! Pack construction and electrical parameters.

use super::BatteryError;
use crate::sim::PiecewiseLinear;
use serde::{Deserialize, Serialize};

/// Open-circuit voltage as a function of state of charge.
///
/// The table must span the full charge range [0, 1] and be strictly
/// increasing; a flat or inverted stretch would make the voltage useless as a
/// charge observer and can flip the sign of the tracking gain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct OcvCurve(PiecewiseLinear);

impl OcvCurve {
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self, BatteryError> {
        let table = PiecewiseLinear::from_pairs(points).map_err(BatteryError::Sim)?;
        if table.x_min() != 0.0 || table.x_max() != 1.0 {
            return Err(BatteryError::Invalid {
                what: "ocv",
                why: "table must span state of charge 0 to 1",
            });
        }
        if !table.is_strictly_increasing() {
            return Err(BatteryError::Invalid {
                what: "ocv",
                why: "open-circuit voltage must rise strictly with charge",
            });
        }
        if table.y_values()[0] <= 0.0 {
            return Err(BatteryError::Invalid {
                what: "ocv",
                why: "voltage at zero charge must be positive",
            });
        }
        Ok(OcvCurve(table))
    }

    /// Volts at the given state of charge (clamped to the table ends).
    pub fn voltage(&self, z: f64) -> f64 {
        self.0.eval(z)
    }

    /// dV/dz at the given state of charge; 0 outside the table.
    pub fn slope(&self, z: f64) -> f64 {
        self.0.slope(z)
    }
}

impl TryFrom<Vec<(f64, f64)>> for OcvCurve {
    type Error = String;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self, String> {
        OcvCurve::from_points(points).map_err(|e| e.to_string())
    }
}

impl From<OcvCurve> for Vec<(f64, f64)> {
    fn from(curve: OcvCurve) -> Self {
        curve.0.breakpoints().collect()
    }
}

/// A lithium-ion curve with the usual knee below 10% charge.
pub fn default_ocv_points() -> Vec<(f64, f64)> {
    vec![
        (0.0, 3.0),
        (0.1, 3.4),
        (0.3, 3.55),
        (0.5, 3.65),
        (0.7, 3.8),
        (0.9, 3.95),
        (1.0, 4.1),
    ]
}

/// Cell count per dimension for a square pack (`n_s == n_p`) holding
/// `energy_wh` at nominal cell voltage `v_nom` and capacity `q_cell_ah`.
pub fn cells_per_dimension(energy_wh: f64, v_nom: f64, q_cell_ah: f64) -> u32 {
    assert!(
        energy_wh > 0.0 && v_nom > 0.0 && q_cell_ah > 0.0,
        "pack sizing needs positive energy, voltage and capacity"
    );
    (energy_wh / (v_nom * q_cell_ah)).sqrt().round() as u32
}

/// Electrical and control parameters of the pack.
///
/// The pack is `n_s` cells in series, `n_p` strings in parallel, every cell
/// carrying the same current `i_c`. One cell is simulated and scaled.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryParams {
    /// Cells in series per string.
    pub n_s: u32,
    /// Parallel strings.
    pub n_p: u32,
    /// Cell capacity in ampere-hours.
    pub q_cell_ah: f64,
    /// Coulombic efficiency.
    pub eta_b: f64,
    /// Ohmic resistance of one cell, ohms.
    pub r0: f64,
    /// Diffusion branch resistance, ohms.
    pub r1: f64,
    /// Diffusion branch capacitance, farads.
    pub c1: f64,
    /// Hysteresis decay gain (dimensionless, scales the charge throughput).
    pub g_hyst: f64,
    /// Hysteresis magnitude bound, volts.
    pub m_hyst: f64,
    /// Lower bound on cell current, amperes (negative: discharge limit).
    pub i_min: f64,
    /// Upper bound on cell current, amperes (charge limit).
    pub i_max: f64,
    /// State-of-charge floor.
    pub z_min: f64,
    /// State-of-charge ceiling.
    pub z_max: f64,
    /// Power tracking gain on the per-cell power error, 1/s.
    pub k_ic: f64,
    /// Current-box barrier rate, 1/s.
    pub c_ic: f64,
    /// Charge-box barrier rate, first stage, 1/s.
    pub c_z1: f64,
    /// Charge-box barrier rate, second stage, 1/s.
    pub c_z2: f64,
    /// Effective source resistance in the tracking linearization, ohms.
    pub r_e: f64,
    /// Keep the series count in the charge dynamics. The standard pack model
    /// scales charge throughput by `n_s`; with a square pack the factor
    /// cancels against `n_p` in the capacity, reproducing the single-cell
    /// rate. Disable to integrate plain cell current against pack capacity.
    pub soc_scales_with_series: bool,
    pub ocv: OcvCurve,
}

impl Default for BatteryParams {
    fn default() -> Self {
        // 160 MWh-class pack: 1557 x 1557 cells of 20 Ah at 3.3 V nominal,
        // 5 A cell envelope, 10-90% charge window.
        let n = cells_per_dimension(160.0e6, 3.3, 20.0);
        BatteryParams {
            n_s: n,
            n_p: n,
            q_cell_ah: 20.0,
            eta_b: 0.99,
            r0: 0.005,
            r1: 0.002,
            c1: 5000.0,
            g_hyst: 150.0,
            m_hyst: 0.03,
            i_min: -5.0,
            i_max: 5.0,
            z_min: 0.1,
            z_max: 0.9,
            k_ic: 20.0,
            c_ic: 20.0,
            c_z1: 1.0,
            c_z2: 1.0,
            r_e: 0.0,
            soc_scales_with_series: true,
            ocv: OcvCurve::from_points(default_ocv_points()).expect("default table is valid"),
        }
    }
}

impl BatteryParams {
    /// Reference capacity in coulombs: parallel strings times cell capacity.
    pub fn q_c(&self) -> f64 {
        3600.0 * f64::from(self.n_p) * self.q_cell_ah
    }

    /// d(z)/dt per ampere of cell current.
    pub fn soc_rate_per_amp(&self) -> f64 {
        let series = if self.soc_scales_with_series {
            f64::from(self.n_s)
        } else {
            1.0
        };
        self.eta_b * series / self.q_c()
    }

    pub fn cell_count(&self) -> f64 {
        f64::from(self.n_s) * f64::from(self.n_p)
    }

    /// Largest current magnitude the box allows.
    pub fn i_abs_max(&self) -> f64 {
        self.i_min.abs().max(self.i_max.abs())
    }

    pub fn validate(&self) -> Result<(), BatteryError> {
        let positive: &[(&'static str, f64)] = &[
            ("q_cell_ah", self.q_cell_ah),
            ("eta_b", self.eta_b),
            ("r0", self.r0),
            ("r1", self.r1),
            ("c1", self.c1),
            ("g_hyst", self.g_hyst),
            ("m_hyst", self.m_hyst),
            ("k_ic", self.k_ic),
            ("c_ic", self.c_ic),
            ("c_z1", self.c_z1),
            ("c_z2", self.c_z2),
        ];
        for &(what, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(BatteryError::Invalid {
                    what,
                    why: "must be positive and finite",
                });
            }
        }
        if self.n_s == 0 || self.n_p == 0 {
            return Err(BatteryError::Invalid {
                what: "n_s/n_p",
                why: "pack needs at least one cell in each dimension",
            });
        }
        if self.eta_b > 1.0 {
            return Err(BatteryError::Invalid {
                what: "eta_b",
                why: "coulombic efficiency cannot exceed 1",
            });
        }
        if !(self.i_min < self.i_max) {
            return Err(BatteryError::Invalid {
                what: "i_min/i_max",
                why: "current box must have positive width",
            });
        }
        if !(0.0 <= self.z_min && self.z_min < self.z_max && self.z_max <= 1.0) {
            return Err(BatteryError::Invalid {
                what: "z_min/z_max",
                why: "charge box must satisfy 0 <= z_min < z_max <= 1",
            });
        }
        if !self.r_e.is_finite() {
            return Err(BatteryError::Invalid {
                what: "r_e",
                why: "must be finite",
            });
        }
        // The tracking controller divides by v + r_e*i. Bound the terminal
        // voltage from below over the whole operating box (worst resistive and
        // diffusion drop, hysteresis fully against us) and require the
        // denominator to stay positive there.
        let i_env = self.i_abs_max();
        let u1_env = self.r1 * i_env;
        let v_floor =
            self.ocv.voltage(self.z_min) - (self.r0 * i_env + u1_env + self.m_hyst);
        if !(v_floor - self.r_e.abs() * i_env > 0.0) {
            return Err(BatteryError::Invalid {
                what: "r_e",
                why: "v + r_e*i can reach zero inside the operating box",
            });
        }
        Ok(())
    }
}
