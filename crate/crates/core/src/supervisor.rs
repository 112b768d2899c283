//! Plant-level dispatch: split a demand signal into wind, solar and battery
//! setpoints.
//!
//! The dispatcher is rule-based. Renewables carry as much of the demand as
//! their availability allows, apportioned proportionally so that no plant is
//! asked for more than it has. The battery covers the residual through a
//! discrete integrator, clamped to its rating and derated near the charge
//! thresholds so the supervisor never fights the battery's own safety filter.
//! Above the high-charge threshold, surplus renewable headroom is used to
//! charge; the renewable target is raised by the same amount so the grid
//! still sees the full demand.
//!
//! Anti-windup is by synchronization: the stored integral is always the
//! command actually issued, so the integrator cannot wind beyond a clamp or
//! a derate while the plant is pinned (saturated renewables with the battery
//! at its rating stop command growth entirely).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SupervisorError {
    #[error("invalid supervisor parameter {what}: {why}")]
    Invalid {
        what: &'static str,
        why: &'static str,
    },
}

/// Dispatch tuning. Thresholds are states of charge, powers are watts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SupervisorParams {
    /// Above this state of charge, surplus renewables charge the battery.
    pub soc_high_threshold: f64,
    /// Below this state of charge plus the ramp width, discharge is derated.
    pub soc_low_threshold: f64,
    /// Charging/discharging capability, watts.
    pub battery_power_rating: f64,
    /// Seconds between dispatch updates; commands are held in between.
    pub update_period_s: f64,
    /// Relative tolerance used when deciding a plant is at its availability.
    pub saturation_margin: f64,
    /// Fraction of the residual absorbed into the battery command per update.
    pub integral_gain: f64,
    /// Width of the linear derating ramps next to the charge thresholds.
    pub derate_ramp_width: f64,
}

impl Default for SupervisorParams {
    fn default() -> Self {
        SupervisorParams {
            soc_high_threshold: 0.85,
            soc_low_threshold: 0.15,
            battery_power_rating: 40.0e6,
            update_period_s: 1.0,
            saturation_margin: 0.02,
            integral_gain: 0.2,
            derate_ramp_width: 0.05,
        }
    }
}

impl SupervisorParams {
    /// `z_min`/`z_max` are the battery's own charge box; the thresholds must
    /// sit inside it or the derating ramps would act where the battery can
    /// never be.
    pub fn validate(&self, z_min: f64, z_max: f64) -> Result<(), SupervisorError> {
        if !(self.battery_power_rating > 0.0) {
            return Err(SupervisorError::Invalid {
                what: "battery_power_rating",
                why: "must be positive",
            });
        }
        if !(self.update_period_s > 0.0) {
            return Err(SupervisorError::Invalid {
                what: "update_period_s",
                why: "must be positive",
            });
        }
        if !(self.integral_gain > 0.0 && self.integral_gain <= 1.0) {
            return Err(SupervisorError::Invalid {
                what: "integral_gain",
                why: "must lie in (0, 1]",
            });
        }
        if !(self.derate_ramp_width > 0.0) {
            return Err(SupervisorError::Invalid {
                what: "derate_ramp_width",
                why: "must be positive",
            });
        }
        if !(0.0 <= self.saturation_margin && self.saturation_margin < 1.0) {
            return Err(SupervisorError::Invalid {
                what: "saturation_margin",
                why: "must lie in [0, 1)",
            });
        }
        if !(z_min <= self.soc_low_threshold
            && self.soc_low_threshold < self.soc_high_threshold
            && self.soc_high_threshold <= z_max)
        {
            return Err(SupervisorError::Invalid {
                what: "soc thresholds",
                why: "need z_min <= soc_low < soc_high <= z_max",
            });
        }
        Ok(())
    }
}

/// Setpoints for one dispatch interval. Battery is discharge-positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispatchCommand {
    pub p_wind_sp: f64,
    pub p_solar_sp: f64,
    pub p_batt_sp: f64,
}

impl DispatchCommand {
    pub const ZERO: DispatchCommand = DispatchCommand {
        p_wind_sp: 0.0,
        p_solar_sp: 0.0,
        p_batt_sp: 0.0,
    };
}

/// The dispatcher. One instance per plant; holds the residual integrator.
#[derive(Debug, Clone)]
pub struct Supervisor {
    params: SupervisorParams,
    /// Battery charge box, for the charge-side derating ramp.
    z_max: f64,
    /// Battery command carried between updates, watts discharge-positive.
    batt_integral_w: f64,
}

impl Supervisor {
    pub fn new(params: SupervisorParams, z_min: f64, z_max: f64) -> Result<Self, SupervisorError> {
        params.validate(z_min, z_max)?;
        Ok(Supervisor {
            params,
            z_max,
            batt_integral_w: 0.0,
        })
    }

    pub fn params(&self) -> &SupervisorParams {
        &self.params
    }

    /// The battery command currently carried by the integrator.
    pub fn battery_command_w(&self) -> f64 {
        self.batt_integral_w
    }

    /// Produce setpoints for the next interval.
    ///
    /// `wind_measured_w`/`solar_measured_w` are the powers delivered over the
    /// interval that just ended; availabilities are current. `soc` is the
    /// battery state of charge.
    pub fn supervise(
        &mut self,
        demand_w: f64,
        wind_avail_w: f64,
        solar_avail_w: f64,
        wind_measured_w: f64,
        solar_measured_w: f64,
        soc: f64,
    ) -> DispatchCommand {
        let p = self.params;
        let demand = demand_w.max(0.0);
        let wind_avail = wind_avail_w.max(0.0);
        let solar_avail = solar_avail_w.max(0.0);
        let avail = wind_avail + solar_avail;

        // Charge branch: battery nearly full and renewables can carry the
        // demand alone. Spend surplus headroom on charging, tapered to zero
        // toward the top of the charge box.
        let mut charge_w = 0.0;
        if soc > p.soc_high_threshold && avail >= demand {
            let surplus = avail - demand;
            let taper = ((self.z_max - soc) / p.derate_ramp_width).clamp(0.0, 1.0);
            charge_w = surplus.min(p.battery_power_rating) * taper;
        }

        let batt_cmd = if charge_w > 0.0 {
            -charge_w
        } else {
            let residual =
                demand - wind_measured_w - solar_measured_w - self.batt_integral_w;
            let candidate = self.batt_integral_w + p.integral_gain * residual;
            // Derate toward the thresholds the battery's own filter enforces:
            // discharge fades out above the low threshold, charge fades out
            // below the top of the box.
            let envelope = if candidate > 0.0 {
                ((soc - p.soc_low_threshold) / p.derate_ramp_width).clamp(0.0, 1.0)
            } else {
                ((self.z_max - soc) / p.derate_ramp_width).clamp(0.0, 1.0)
            };
            (candidate * envelope).clamp(-p.battery_power_rating, p.battery_power_rating)
        };
        // Sync the integrator to what was issued: clamps and derates never
        // accumulate hidden command.
        self.batt_integral_w = batt_cmd;

        // Renewables carry the demand plus whatever is being stored.
        let target = (demand + charge_w).min(avail);
        let (p_wind_sp, p_solar_sp) = if avail > 0.0 {
            (
                target * wind_avail / avail,
                target * solar_avail / avail,
            )
        } else {
            (0.0, 0.0)
        };

        DispatchCommand {
            p_wind_sp,
            p_solar_sp,
            p_batt_sp: batt_cmd,
        }
    }
}
