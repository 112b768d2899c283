//! The simulation loop: three subsystems stepped in lockstep under a
//! slower dispatch tick.
//!
//! Exogenous signals are sampled once per dispatch interval and held, so the
//! plant sees exactly the inputs the dispatcher acted on. All subsystem
//! states advance with the same fixed step `dt_s`.

use super::{Scenario, ScenarioError};
use crate::battery::{battery_step, delivered_power_w, CellState};
use crate::event::{Event, EventKind};
use crate::sim::{sample_signal_with, SignalSeries};
use crate::solar::{solar_available, solar_step, SolarState};
use crate::supervisor::{DispatchCommand, Supervisor};
use crate::wind::{farm_available_power, init_omegas_at_lambda};

/// One emitted sample. Row 0 is the initial condition under the first
/// dispatch command; row k >= 1 describes the state after step k and the
/// inputs held during it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub time_s: f64,
    /// Demand held over the step ending at `time_s`, W.
    pub demand_w: f64,
    /// Farm aerodynamic power at this instant, W.
    pub wind_w: f64,
    /// Solar power delivered to the grid, W.
    pub solar_w: f64,
    /// Battery power delivered to the grid (negative while charging), W.
    pub battery_w: f64,
    /// Sum of the three productions, W.
    pub total_w: f64,
    /// Free-stream farm capability held over the step, W.
    pub wind_avail_w: f64,
    /// Irradiance-limited solar capability held over the step, W.
    pub solar_avail_w: f64,
    pub p_wind_sp_w: f64,
    pub p_solar_sp_w: f64,
    pub p_batt_sp_w: f64,
    /// Battery state of charge.
    pub soc: f64,
    /// Per-cell current, positive while charging, A.
    pub cell_current_a: f64,
    /// Accumulated per-cell charge since the start of the run, C.
    pub charge_integral_c: f64,
    /// Tip-speed ratio of every turbine against the wind its controller
    /// acted on.
    pub lambdas: Vec<f64>,
}

/// Terminal subsystem states, exposed for convergence and restart checks.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalState {
    pub omegas: Vec<f64>,
    pub solar: SolarState,
    pub cell: CellState,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
    pub events: Vec<Event>,
    pub n_turbines: usize,
    pub final_state: FinalState,
}

fn sample(
    sc: &Scenario,
    series: &SignalSeries,
    t: f64,
) -> Result<f64, ScenarioError> {
    sample_signal_with(series, t, sc.interpolation).map_err(|e| ScenarioError::at(t, e))
}

/// Execute a scenario from its initial condition to `duration_s`.
///
/// Deterministic: the record depends only on the scenario value.
pub fn run_scenario(sc: &Scenario) -> Result<RunRecord, ScenarioError> {
    let dt = sc.dt_s;
    let n_steps = sc.n_steps();
    let spu = sc.steps_per_update();
    let n_turbines = sc.farm.n_turbines();

    let u0 = sample(sc, &sc.wind_signal, 0.0)?;
    let mut omegas = init_omegas_at_lambda(
        &sc.farm.layout,
        &sc.farm.turbine,
        u0,
        sc.initial_tip_speed_ratio,
    )?;
    let mut solar_state = sc.solar_init;
    let mut cell = CellState::at_soc(sc.initial_soc);
    let mut supervisor = Supervisor::new(sc.supervisor, sc.battery.z_min, sc.battery.z_max)?;

    let mut rows = Vec::with_capacity(n_steps + 1);
    let mut events = Vec::new();
    let mut charge_c = 0.0;
    let mut solar_delivered = 0.0;

    // Held over each dispatch interval.
    let mut u_held = u0;
    let mut irr_held = 0.0;
    let mut demand_held = 0.0;
    let mut wind_avail = 0.0;
    let mut solar_avail = 0.0;
    let mut cmd = DispatchCommand::ZERO;

    for k in 0..n_steps {
        let t = k as f64 * dt;

        if k % spu == 0 {
            u_held = sample(sc, &sc.wind_signal, t)?;
            irr_held = sample(sc, &sc.irradiance_signal, t)?;
            demand_held = sample(sc, &sc.demand_signal, t)?;
            wind_avail = farm_available_power(&sc.farm.turbine, n_turbines, u_held);
            solar_avail =
                solar_available(&sc.solar, irr_held).map_err(|e| ScenarioError::at(t, e))?;
            let m = sc
                .farm
                .measure(&omegas, u_held)
                .map_err(|e| ScenarioError::at(t, e))?;
            if k == 0 {
                solar_delivered = solar_state.p_s.clamp(0.0, solar_avail);
            }
            cmd = supervisor.supervise(
                demand_held,
                wind_avail,
                solar_avail,
                m.total_power,
                solar_delivered,
                cell.z,
            );
        }

        if k == 0 {
            let m0 = sc
                .farm
                .measure(&omegas, u_held)
                .map_err(|e| ScenarioError::at(t, e))?;
            let battery_w = delivered_power_w(&sc.battery, &cell);
            rows.push(RunRow {
                time_s: 0.0,
                demand_w: demand_held,
                wind_w: m0.total_power,
                solar_w: solar_delivered,
                battery_w,
                total_w: m0.total_power + solar_delivered + battery_w,
                wind_avail_w: wind_avail,
                solar_avail_w: solar_avail,
                p_wind_sp_w: cmd.p_wind_sp,
                p_solar_sp_w: cmd.p_solar_sp,
                p_batt_sp_w: cmd.p_batt_sp,
                soc: cell.z,
                cell_current_a: cell.i_c,
                charge_integral_c: 0.0,
                lambdas: m0.lambdas,
            });
        }

        let fr = sc
            .farm
            .step(&omegas, u_held, cmd.p_wind_sp, dt)
            .map_err(|e| ScenarioError::at(t, e))?;
        let sr = solar_step(&sc.solar, &solar_state, irr_held, cmd.p_solar_sp, dt)
            .map_err(|e| ScenarioError::at(t, e))?;
        let br = battery_step(&sc.battery, &cell, cmd.p_batt_sp, dt)
            .map_err(|e| ScenarioError::at(t, e))?;

        for &j in &fr.infeasible {
            events.push(Event {
                time_s: t,
                kind: EventKind::WindQpInfeasible,
                unit: j,
            });
        }
        if br.diag.infeasible {
            events.push(Event {
                time_s: t,
                kind: EventKind::BatteryQpInfeasible,
                unit: 0,
            });
        }
        if br.diag.gain_low {
            events.push(Event {
                time_s: t,
                kind: EventKind::BatteryGainMarginLow,
                unit: 0,
            });
        }

        omegas = fr.omegas;
        solar_state = sr.state;
        cell = br.state;
        charge_c += br.diag.charge_delta_c;
        solar_delivered = sr.delivered_w;

        let t_next = (k + 1) as f64 * dt;
        let m_end = sc
            .farm
            .measure(&omegas, u_held)
            .map_err(|e| ScenarioError::at(t_next, e))?;
        let total_w = m_end.total_power + sr.delivered_w + br.delivered_w;
        rows.push(RunRow {
            time_s: t_next,
            demand_w: demand_held,
            wind_w: m_end.total_power,
            solar_w: sr.delivered_w,
            battery_w: br.delivered_w,
            total_w,
            wind_avail_w: wind_avail,
            solar_avail_w: solar_avail,
            p_wind_sp_w: cmd.p_wind_sp,
            p_solar_sp_w: cmd.p_solar_sp,
            p_batt_sp_w: cmd.p_batt_sp,
            soc: cell.z,
            cell_current_a: cell.i_c,
            charge_integral_c: charge_c,
            lambdas: fr.lambda_ctrl,
        });
    }

    Ok(RunRecord {
        rows,
        events,
        n_turbines,
        final_state: FinalState {
            omegas,
            solar: solar_state,
            cell,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::BatteryParams;
    use crate::scenario::{generate_synthetic_signals, SignalProfile};
    use crate::sim::Interpolation;
    use crate::solar::SolarParams;
    use crate::supervisor::SupervisorParams;
    use crate::wind::{
        FarmLayout, TurbineParams, WindControllerParams, WindFarm,
    };

    /// 2x2 farm, small horizon, constant-ish inputs.
    fn tiny_scenario(duration_s: f64) -> Scenario {
        let sig = generate_synthetic_signals(17, duration_s, SignalProfile::Steady);
        let turbine = TurbineParams::default();
        let spacing = 7.0 * 2.0 * turbine.r_r;
        Scenario {
            duration_s,
            dt_s: 0.5,
            seed: 17,
            wind_signal: sig.wind,
            irradiance_signal: sig.irradiance,
            demand_signal: sig.demand,
            interpolation: Interpolation::Zoh,
            farm: WindFarm {
                turbine,
                ctrl: WindControllerParams::default(),
                layout: FarmLayout::rectangular(2, 2, spacing, 0.04).unwrap(),
            },
            initial_tip_speed_ratio: 7.0,
            solar: SolarParams::default(),
            solar_init: SolarState::default(),
            battery: BatteryParams::default(),
            initial_soc: 0.5,
            supervisor: SupervisorParams::default(),
            config_echo: String::new(),
        }
    }

    /// Same scenario but with constant signals, for settling checks.
    fn constant_scenario(duration_s: f64, wind: f64, irr: f64, demand: f64) -> Scenario {
        let mut sc = tiny_scenario(duration_s);
        let times: Vec<f64> = [0.0, duration_s + 1.0].to_vec();
        sc.wind_signal = SignalSeries::new(times.clone(), vec![wind; 2]).unwrap();
        sc.irradiance_signal = SignalSeries::new(times.clone(), vec![irr; 2]).unwrap();
        sc.demand_signal = SignalSeries::new(times, vec![demand; 2]).unwrap();
        sc
    }

    #[test]
    fn record_shape_matches_the_grid() {
        let sc = tiny_scenario(60.0);
        let r = run_scenario(&sc).unwrap();
        assert_eq!(r.rows.len(), 121, "one row per step plus the initial row");
        assert_eq!(r.rows[0].time_s, 0.0);
        assert_eq!(r.rows.last().unwrap().time_s, 60.0);
        assert_eq!(r.n_turbines, 4);
        assert!(r.rows.iter().all(|row| row.lambdas.len() == 4));
        assert_eq!(r.final_state.omegas.len(), 4);
        for row in &r.rows {
            let sum = row.wind_w + row.solar_w + row.battery_w;
            assert!(
                (row.total_w - sum).abs() <= 1e-9 * sum.abs().max(1.0),
                "total must be the sum of the parts at t={}",
                row.time_s
            );
        }
    }

    #[test]
    fn dispatch_is_held_between_ticks() {
        let sc = tiny_scenario(30.0);
        assert_eq!(sc.steps_per_update(), 2);
        let r = run_scenario(&sc).unwrap();
        // Steps 2k and 2k+1 share a command, so rows 2k+1 and 2k+2 match.
        for k in 0..14 {
            let (a, b) = (&r.rows[2 * k + 1], &r.rows[2 * k + 2]);
            assert_eq!(a.p_batt_sp_w, b.p_batt_sp_w, "tick {k}");
            assert_eq!(a.p_wind_sp_w, b.p_wind_sp_w, "tick {k}");
            assert_eq!(a.demand_w, b.demand_w, "tick {k}");
        }
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let sc = tiny_scenario(45.0);
        let a = run_scenario(&sc).unwrap();
        let b = run_scenario(&sc).unwrap();
        assert!(a == b, "identical scenarios must give identical records");
    }

    #[test]
    fn charge_integral_agrees_with_state_of_charge() {
        let sc = constant_scenario(120.0, 9.0, 300.0, 45.0e6);
        let r = run_scenario(&sc).unwrap();
        let last = r.rows.last().unwrap();
        let from_soc = (last.soc - sc.initial_soc) / sc.battery.soc_rate_per_amp();
        assert!(
            (from_soc - last.charge_integral_c).abs()
                <= 1e-9 * last.charge_integral_c.abs().max(1.0),
            "accumulated charge {} C vs state-of-charge change {} C",
            last.charge_integral_c,
            from_soc
        );
        assert!(
            last.charge_integral_c < 0.0,
            "a shortfall scenario must discharge the battery"
        );
    }

    #[test]
    fn plant_settles_onto_constant_demand() {
        // 2x2 farm at 10 m/s (~14 MW) plus 25 MW of solar at 500 W/m^2;
        // the battery carries the ~1 MW residual left by wake losses.
        let sc = constant_scenario(240.0, 10.0, 500.0, 30.0e6);
        let r = run_scenario(&sc).unwrap();
        let tail: Vec<&RunRow> = r.rows.iter().filter(|row| row.time_s >= 180.0).collect();
        for row in tail {
            let err = (row.total_w - row.demand_w).abs();
            assert!(
                err < 0.02 * row.demand_w,
                "tracking error {:.0} W at t={} exceeds 2%",
                err,
                row.time_s
            );
        }
        assert!(r.events.is_empty(), "steady run must raise no events");
    }

    #[test]
    fn barrier_holds_under_an_absurd_setpoint() {
        // Demand far above capability: every turbine is pushed against the
        // tip-speed barrier and must stay at or below it.
        let sc = constant_scenario(120.0, 12.0, 0.0, 200.0e6);
        let r = run_scenario(&sc).unwrap();
        let barrier = sc.farm.ctrl.lambda_barrier;
        for row in &r.rows {
            for (j, &l) in row.lambdas.iter().enumerate() {
                assert!(
                    l <= barrier * (1.0 + 1e-6),
                    "turbine {j} exceeded the barrier at t={}: {l}",
                    row.time_s
                );
            }
        }
    }
}
