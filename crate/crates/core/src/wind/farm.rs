//! Farm-level stepping: wake field, per-turbine torque filters, rotor
//! integration.

use crate::sim::integrate_step;

use super::{
    aero_power, axial_induction, effective_wind_field, torque_safe, wake_deficit, FarmLayout,
    TurbineParams, WindControllerParams, WindError,
};

/// The wind farm: one parameter set shared by identical turbines plus the
/// layout. Rotor speeds live outside (the harness owns state).
#[derive(Debug, Clone, PartialEq)]
pub struct WindFarm {
    pub turbine: TurbineParams,
    pub ctrl: WindControllerParams,
    pub layout: FarmLayout,
}

/// Everything observable about the farm at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FarmMeasurement {
    /// Effective wind at each turbine, m/s.
    pub u_eff: Vec<f64>,
    /// Tip-speed ratio of each turbine at its effective wind.
    pub lambdas: Vec<f64>,
    /// Aerodynamic power of each turbine, W.
    pub powers: Vec<f64>,
    /// Farm total, W.
    pub total_power: f64,
}

/// Result of advancing the farm one step.
#[derive(Debug, Clone, PartialEq)]
pub struct FarmStepResult {
    /// Rotor speeds after the step, floored at `omega_floor`.
    pub omegas: Vec<f64>,
    /// Torques held over the step, N*m.
    pub torques: Vec<f64>,
    /// Tip-speed ratio after the step measured against the wind each
    /// controller acted on; this is the quantity the barrier certifies.
    pub lambda_ctrl: Vec<f64>,
    /// Turbines whose torque constraint set was empty this step.
    pub infeasible: Vec<usize>,
    /// The measurement taken at the start of the step (wake field the
    /// controllers used).
    pub measurement: FarmMeasurement,
}

impl WindFarm {
    pub fn n_turbines(&self) -> usize {
        self.layout.n_turbines()
    }

    /// Wake field, tip-speed ratios and powers at the current rotor state.
    pub fn measure(&self, omegas: &[f64], u_inf: f64) -> Result<FarmMeasurement, WindError> {
        let u_eff = effective_wind_field(&self.layout, &self.turbine, omegas, u_inf)?;
        let mut lambdas = Vec::with_capacity(omegas.len());
        let mut powers = Vec::with_capacity(omegas.len());
        let mut total = 0.0;
        for (j, (&omega, &u)) in omegas.iter().zip(&u_eff).enumerate() {
            let _ = j;
            lambdas.push(self.turbine.r_r * omega / u);
            let p = aero_power(&self.turbine, u, omega)?;
            powers.push(p);
            total += p;
        }
        Ok(FarmMeasurement {
            u_eff,
            lambdas,
            powers,
            total_power: total,
        })
    }

    /// Advance every rotor by `dt` under a farm power setpoint split equally
    /// across turbines. Wake field and torques are computed once at the step
    /// start and held (zero-order hold).
    pub fn step(
        &self,
        omegas: &[f64],
        u_inf: f64,
        p_farm_setpoint: f64,
        dt: f64,
    ) -> Result<FarmStepResult, WindError> {
        let n = self.n_turbines();
        assert_eq!(omegas.len(), n, "one rotor speed per turbine");
        let measurement = self.measure(omegas, u_inf)?;
        let sp_each = p_farm_setpoint / n as f64;

        let mut new_omegas = Vec::with_capacity(n);
        let mut torques = Vec::with_capacity(n);
        let mut lambda_ctrl = Vec::with_capacity(n);
        let mut infeasible = Vec::new();

        for j in 0..n {
            let u = measurement.u_eff[j];
            let decision = torque_safe(&self.turbine, &self.ctrl, omegas[j], u, sp_each)?;
            if decision.infeasible {
                infeasible.push(j);
            }
            let torque = decision.torque;
            let p = &self.turbine;
            let next = integrate_step(
                &[omegas[j]],
                |x| {
                    // Aero torque P/omega; cp clamps to zero at negative
                    // tip-speed ratios, so a stage dipping through zero speed
                    // contributes no aero torque rather than a singularity.
                    let aero_torque = if x[0].abs() > 1e-12 {
                        aero_power(p, u, x[0]).unwrap() / x[0]
                    } else {
                        0.0
                    };
                    [(aero_torque - torque) / p.j_r]
                },
                dt,
            )?;
            let omega_new = next[0].max(self.turbine.omega_floor);
            new_omegas.push(omega_new);
            torques.push(torque);
            lambda_ctrl.push(self.turbine.r_r * omega_new / u);
        }

        Ok(FarmStepResult {
            omegas: new_omegas,
            torques,
            lambda_ctrl,
            infeasible,
            measurement,
        })
    }
}

/// Rotor speeds putting every turbine at tip-speed ratio `lambda0` relative
/// to its own effective wind. Because induction depends on the tip-speed
/// ratio alone here, one upwind-to-downwind sweep is exact.
pub fn init_omegas_at_lambda(
    layout: &FarmLayout,
    params: &TurbineParams,
    u_inf: f64,
    lambda0: f64,
) -> Result<Vec<f64>, WindError> {
    if !(u_inf > 0.0) {
        return Err(WindError::NonPositiveWind { u: u_inf });
    }
    let a0 = axial_induction(params.ct.value(lambda0))?;
    let n = layout.n_turbines();
    let mut u_eff = vec![0.0; n];
    for &j in layout.sweep_order() {
        let mut sum_sq = 0.0;
        for &i in layout.upstream_of(j) {
            let dx = layout.position(j) - layout.position(i);
            let d = wake_deficit(u_eff[i], a0, dx, params.r_r, layout.k_w);
            sum_sq += d * d;
        }
        u_eff[j] = (u_inf - sum_sq.sqrt()).max(params.u_min);
    }
    Ok(u_eff.iter().map(|&u| lambda0 * u / params.r_r).collect())
}
