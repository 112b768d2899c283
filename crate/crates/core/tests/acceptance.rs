//! Acceptance suite: one test per plant-level requirement, each checked
//! against an independent oracle or a first-principles construction. Every
//! test ends with a single PASS line carrying its measured numbers (visible
//! under `--nocapture`).

use std::time::Instant;

use hpp_core::battery::{battery_step, BatteryParams, CellState};
use hpp_core::sim::{intersect_halfplanes, project_to_interval, Halfplane, SimError};
use hpp_core::solar::{solar_step, SolarParams, SolarState};
use hpp_core::supervisor::SupervisorParams;
use hpp_core::wind::{
    aero_power, axial_induction, farm_available_power, init_omegas_at_lambda, torque_nominal,
    wake_deficit, FarmLayout, TurbineParams, WindControllerParams, WindFarm,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// 1. The interval projection must agree with a brute-force minimizer.

/// Grid-search minimizer of `(x - u_star)^2` subject to `a*x <= b` rows,
/// refined by bisection toward the feasibility boundary. Never touches the
/// interval algebra under test.
fn oracle_nearest_feasible(u_star: f64, rows: &[Halfplane]) -> Option<f64> {
    let feasible = |x: f64| {
        rows.iter()
            .all(|r| r.slack(x) >= -1e-12 * (1.0 + r.b.abs() + (r.a * x).abs()))
    };
    if feasible(u_star) {
        return Some(u_star);
    }

    // Sweep range wide enough to contain every row crossing and the nominal.
    let mut range = 12.0 + u_star.abs();
    for r in rows {
        if r.a != 0.0 {
            range = range.max((r.b / r.a).abs() + 1.0);
        }
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(2048 + rows.len());
    const N: usize = 2001;
    for i in 0..N {
        candidates.push(-range + 2.0 * range * i as f64 / (N - 1) as f64);
    }
    for r in rows {
        if r.a != 0.0 {
            candidates.push(r.b / r.a);
        }
    }
    let best = candidates
        .into_iter()
        .filter(|&x| feasible(x))
        .min_by(|a, b| (a - u_star).abs().total_cmp(&(b - u_star).abs()))?;

    // The feasible set is connected, so the segment from the best grid point
    // toward the nominal crosses the boundary exactly once.
    let (mut lo, mut hi) = (best, u_star);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[test]
fn criterion_1_qp_projection_matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0acce57);
    let started = Instant::now();
    let (mut n_feasible, mut n_empty) = (0usize, 0usize);
    let mut worst = 0.0f64;

    for case in 0..1000 {
        let n_rows = case % 7;
        let rows: Vec<Halfplane> = (0..n_rows)
            .map(|_| {
                let a = if rng.gen_range(0..8) == 0 {
                    0.0
                } else {
                    rng.gen_range(-3.0..3.0)
                };
                Halfplane {
                    a,
                    b: rng.gen_range(-6.0..6.0),
                }
            })
            .collect();
        let u_star: f64 = rng.gen_range(-12.0..12.0);

        let got = project_to_interval(u_star, intersect_halfplanes(&rows));
        let want = oracle_nearest_feasible(u_star, &rows);
        match (got, want) {
            (Ok(x), Some(y)) => {
                n_feasible += 1;
                worst = worst.max((x - y).abs());
                assert!(
                    (x - y).abs() <= 1e-9,
                    "case {case}: projection {x} vs oracle {y} for u*={u_star}, rows {rows:?}"
                );
            }
            (Err(SimError::EmptyFeasibleSet { .. }), None) => n_empty += 1,
            (got, want) => panic!(
                "case {case}: feasibility disagreement ({got:?} vs oracle {want:?}) \
                 for u*={u_star}, rows {rows:?}"
            ),
        }
    }
    let elapsed = started.elapsed().as_secs_f64();

    assert!(n_feasible > 100, "too few feasible cases: {n_feasible}");
    assert!(n_empty > 100, "too few empty cases: {n_empty}");
    assert!(elapsed < 5.0, "oracle comparison took {elapsed:.2} s");
    println!(
        "PASS criterion 1: 1000 instances ({n_feasible} feasible, {n_empty} empty), \
         worst gap {worst:.2e}, {elapsed:.2} s"
    );
}

// ---------------------------------------------------------------------------
// 2. Tip-speed ratio invariance on the full farm.
//
// Forward invariance is the claim that trajectories starting in the safe set
// stay there, and its binding case is the boundary. Every rotor starts
// exactly on the barrier against its self-consistent wake field while the
// dispatch demands twice the available power, so the nominal controller
// pushes for acceleration at every single step and the filter must hold the
// line for the whole run.

#[test]
fn criterion_2_tip_speed_ratio_invariant_on_the_barrier() {
    let turbine = TurbineParams::default();
    let ctrl = WindControllerParams::default();
    let layout = FarmLayout::rectangular(8, 4, 7.0 * 2.0 * turbine.r_r, 0.04).unwrap();
    let farm = WindFarm {
        turbine,
        ctrl,
        layout,
    };
    let n = farm.n_turbines();
    let u_inf = 12.0;
    let barrier = farm.ctrl.lambda_barrier;
    let setpoint = 2.0 * farm_available_power(&farm.turbine, n, u_inf);
    let dt = 0.5;
    let n_steps = (1800.0f64 / dt) as usize;

    let mut omegas = init_omegas_at_lambda(&farm.layout, &farm.turbine, u_inf, barrier).unwrap();

    // The test has no teeth if the filter is idle: the tracking torque alone
    // must differ from the applied torque on the very first step.
    {
        let first = farm.step(&omegas, u_inf, setpoint, dt).unwrap();
        let nominal = torque_nominal(
            &farm.turbine,
            &farm.ctrl,
            omegas[0],
            first.measurement.u_eff[0],
            setpoint / n as f64,
        )
        .unwrap();
        assert!(
            first.torques[0] > 2.0 * nominal.abs(),
            "filter must override the tracking torque on the barrier: nominal {nominal:.3e}, \
             applied {:.3e}",
            first.torques[0]
        );
    }

    let started = Instant::now();
    let mut max_excess = f64::NEG_INFINITY;
    let mut infeasible = 0usize;
    for _ in 0..n_steps {
        let fr = farm.step(&omegas, u_inf, setpoint, dt).unwrap();
        infeasible += fr.infeasible.len();
        for &l in fr.lambda_ctrl.iter().chain(&fr.measurement.lambdas) {
            max_excess = max_excess.max(l - barrier);
        }
        omegas = fr.omegas;
    }
    let elapsed = started.elapsed().as_secs_f64();

    assert_eq!(infeasible, 0, "barrier holding must stay feasible");
    assert!(
        max_excess <= 1e-6 * barrier,
        "tip-speed ratio crossed the barrier by {max_excess:.3e} (tolerance {:.3e})",
        1e-6 * barrier
    );
    assert!(elapsed < 10.0, "farm run took {elapsed:.2} s");
    println!(
        "PASS criterion 2: {n} turbines x {n_steps} steps on the barrier, \
         max excess {max_excess:.2e} <= {:.2e}, {elapsed:.2} s",
        1e-6 * barrier
    );
}

// ---------------------------------------------------------------------------
// 3. A single turbine tracks a feasible power setpoint.

#[test]
fn criterion_3_single_turbine_tracks_feasible_setpoint() {
    let farm = WindFarm {
        turbine: TurbineParams::default(),
        ctrl: WindControllerParams::default(),
        layout: FarmLayout::new(vec![0.0], vec![0], 0.04).unwrap(),
    };
    let u = 10.0;
    let setpoint = 3.0e6; // below the 3.59 MW the barrier allows at 10 m/s
    let dt = 0.5;
    let mut omega = 6.0 * u / farm.turbine.r_r;

    let mut errors = Vec::with_capacity(601);
    errors.push(aero_power(&farm.turbine, u, omega).unwrap() - setpoint);
    for _ in 0..600 {
        let fr = farm.step(&[omega], u, setpoint, dt).unwrap();
        assert!(fr.infeasible.is_empty(), "feasible setpoint went infeasible");
        omega = fr.omegas[0];
        errors.push(aero_power(&farm.turbine, u, omega).unwrap() - setpoint);
    }

    let final_error = errors.last().unwrap().abs();
    assert!(
        final_error < 1e-3 * setpoint,
        "error after 300 s is {final_error:.3e} W, allowed {:.3e} W",
        1e-3 * setpoint
    );
    let settle = (10.0 / dt) as usize;
    for k in settle..errors.len() - 1 {
        assert!(
            errors[k + 1].abs() <= errors[k].abs() + 1e-3,
            "|e| grew between steps {k} and {}: {:.6e} -> {:.6e}",
            k + 1,
            errors[k].abs(),
            errors[k + 1].abs()
        );
    }
    println!(
        "PASS criterion 3: |e(300 s)| = {final_error:.2e} W (< {:.1e}), |e| monotone from 10 s",
        1e-3 * setpoint
    );
}

// ---------------------------------------------------------------------------
// 4. The battery charge box holds under sustained rating-level pressure.

#[test]
fn criterion_4_battery_charge_box_holds_at_rating() {
    let p = BatteryParams::default();
    assert_eq!(p.z_min, 0.1, "charge floor is ten percent");
    assert_eq!(p.z_max, 0.9, "charge ceiling is ninety percent");
    let rating = SupervisorParams::default().battery_power_rating;
    let dt = 0.5;

    let mut s = CellState::at_soc(0.5);
    let (mut min_z, mut max_z, mut max_abs_i) = (s.z, s.z, s.i_c.abs());
    let observe = |s: &CellState, min_z: &mut f64, max_z: &mut f64, max_i: &mut f64| {
        *min_z = min_z.min(s.z);
        *max_z = max_z.max(s.z);
        *max_i = max_i.max(s.i_c.abs());
    };

    // Discharge at the full rating until the floor is at hand, then keep
    // pressing into it for another ten minutes.
    let mut steps = 0usize;
    while s.z > 0.102 && steps < 30_000 {
        s = battery_step(&p, &s, rating, dt).unwrap().state;
        observe(&s, &mut min_z, &mut max_z, &mut max_abs_i);
        steps += 1;
    }
    assert!(s.z <= 0.102, "discharge never approached the floor: z = {}", s.z);
    for _ in 0..1200 {
        s = battery_step(&p, &s, rating, dt).unwrap().state;
        observe(&s, &mut min_z, &mut max_z, &mut max_abs_i);
    }

    // Symmetric: charge at the full rating into the ceiling.
    steps = 0;
    while s.z < 0.898 && steps < 60_000 {
        s = battery_step(&p, &s, -rating, dt).unwrap().state;
        observe(&s, &mut min_z, &mut max_z, &mut max_abs_i);
        steps += 1;
    }
    assert!(s.z >= 0.898, "charging never approached the ceiling: z = {}", s.z);
    for _ in 0..1200 {
        s = battery_step(&p, &s, -rating, dt).unwrap().state;
        observe(&s, &mut min_z, &mut max_z, &mut max_abs_i);
    }

    assert!(
        min_z >= p.z_min - 1e-4,
        "charge dipped to {min_z}, below the floor tolerance"
    );
    assert!(
        max_z <= p.z_max + 1e-4,
        "charge rose to {max_z}, above the ceiling tolerance"
    );
    assert!(
        max_abs_i <= p.i_abs_max() * (1.0 + 1e-6),
        "cell current peaked at {max_abs_i} A"
    );
    assert!(
        max_abs_i > 4.0,
        "rating-level request should drive the cell near its envelope, peak was {max_abs_i} A"
    );
    println!(
        "PASS criterion 4: z in [{min_z:.6}, {max_z:.6}] against box [0.1, 0.9], \
         peak |i| = {max_abs_i:.4} A <= {:.4}",
        p.i_abs_max() * (1.0 + 1e-6)
    );
}

// ---------------------------------------------------------------------------
// 5. Battery tracking satisfies the disturbance-to-error bound on every
//    constant-setpoint window.

#[test]
fn criterion_5_battery_tracking_satisfies_iss_bound() {
    let p = BatteryParams::default();
    let dt = 0.5;
    let mut s = CellState::at_soc(0.5);
    // (setpoint W, window length s); every window at least a minute long.
    let windows = [
        (10.0e6, 120.0),
        (-15.0e6, 120.0),
        (30.0e6, 90.0),
        (5.0e6, 60.0),
    ];

    for (w, &(sp, len)) in windows.iter().enumerate() {
        let n = (len / dt) as usize;
        let mut d_sup = 0.0f64;
        let mut a_min = f64::INFINITY;
        let mut terminal_e = f64::NAN;
        for _ in 0..n {
            let r = battery_step(&p, &s, sp, dt).unwrap();
            s = r.state;
            d_sup = d_sup.max(r.diag.disturbance_sup_w);
            a_min = a_min.min(r.diag.min_gain);
            terminal_e = r.diag.cell_power_error_w.abs();
            assert!(
                r.diag.min_gain > 0.5,
                "window {w}: tracking gain fell to {} at some step",
                r.diag.min_gain
            );
            assert!(!r.diag.gain_low, "window {w}: gain margin flagged low");
        }
        let bound = 1.05 * d_sup / (2.0 * a_min - 1.0).sqrt();
        assert!(
            terminal_e <= bound,
            "window {w} ({sp:.1e} W): terminal error {terminal_e:.3e} W exceeds \
             {bound:.3e} W (d_sup {d_sup:.3e}, gain {a_min})"
        );
        println!(
            "PASS criterion 5, window {w}: setpoint {sp:+.1e} W for {len} s, \
             |e_T| = {terminal_e:.2e} <= {bound:.2e} W, gain >= {a_min}"
        );
    }
}

// ---------------------------------------------------------------------------
// 6. Solar closed loop matches its closed-form linear response.

#[test]
fn criterion_6_solar_step_matches_closed_form() {
    let p = SolarParams::default();
    assert_eq!((p.tau_s, p.kp, p.ki), (10.0, 2.5, 0.2), "reference gain set");
    let irradiance = 1000.0;
    let available = 5.0e7;
    let sp = 3.0e7; // feasible: below the 50 MW available
    // Matching a continuous-time solution to 1e-6 needs the integrator's own
    // truncation error below that line; dt = 0.5 leaves fourth-order residue
    // right at the tolerance, dt = 0.1 leaves three orders of headroom.
    let dt = 0.1;

    // Error transform E(s) = sp (tau s + 1) / (tau s^2 + (1 + kp) s + ki)
    // gives e(t) = sp * sum_i (tau s_i + 1)/(2 tau s_i + 1 + kp) * exp(s_i t)
    // over the two real closed-loop roots.
    let (s1, s2) = p.eigenvalue_real_parts();
    assert!(s1 != s2 && s1 < 0.0 && s2 < 0.0, "roots {s1}, {s2}");
    let residue = |si: f64| (p.tau_s * si + 1.0) / (2.0 * p.tau_s * si + 1.0 + p.kp);
    let closed_form_p =
        |t: f64| sp - sp * (residue(s1) * (s1 * t).exp() + residue(s2) * (s2 * t).exp());

    let mut state = SolarState::default();
    let mut worst = 0.0f64;
    let n = (20.0 * p.tau_s / dt) as usize;
    for k in 1..=n {
        let r = solar_step(&p, &state, irradiance, sp, dt).unwrap();
        state = r.state;
        assert!(!r.saturated, "step {k} saturated on a feasible setpoint");
        assert_eq!(
            r.delivered_w, state.p_s,
            "below saturation the filter state is delivered unclamped"
        );
        assert!(state.p_s < available, "trajectory must stay below saturation");
        let want = closed_form_p(k as f64 * dt);
        worst = worst.max((state.p_s - want).abs());
    }

    let terminal_rel = (sp - state.p_s).abs() / sp;
    assert!(
        terminal_rel < 1e-6,
        "steady-state error after 20 tau is {terminal_rel:.3e} relative"
    );
    assert!(
        worst <= 1e-6 * sp,
        "trajectory deviates {worst:.3e} W from the closed form ({:.3e} allowed)",
        1e-6 * sp
    );
    println!(
        "PASS criterion 6: closed-form deviation {worst:.2e} W over 20 tau, \
         terminal error {terminal_rel:.2e} relative"
    );
}

// ---------------------------------------------------------------------------
// 7. Wake model spot values and the cost of wakes.

#[test]
fn criterion_7_wake_model_spot_values() {
    // Induction at the textbook thrust coefficient.
    assert_eq!(
        axial_induction(0.75).unwrap(),
        0.25,
        "a(0.75) must be exactly one quarter"
    );

    // Normalized wake diameter 14 radii downstream at expansion 0.04:
    // d_w = 1 + 0.04 ln(1 + e^14), evaluated with 50-digit arithmetic.
    const D_W_REFERENCE: f64 = 1.56000003326113494;
    let r_r = 63.0;
    // At induction one half and unit source wind the deficit is
    // 2/d_w^2 * spread, and the error-function spread saturates to 2 at
    // fourteen radii, leaving d_w = sqrt(2 / deficit).
    let deficit = wake_deficit(1.0, 0.5, 14.0 * r_r, r_r, 0.04);
    let d_w = (2.0 / deficit).sqrt();
    assert!(
        (d_w - D_W_REFERENCE).abs() <= 1e-9,
        "wake diameter {d_w:.17} vs reference {D_W_REFERENCE:.17}"
    );

    // Wakes must cost power whenever any upstream turbine carries induction.
    let turbine = TurbineParams::default();
    let ct_at_init = turbine.ct.value(7.0);
    assert!(
        axial_induction(ct_at_init).unwrap() > 0.0,
        "initial tip-speed ratio must induce a wake"
    );
    let waked = WindFarm {
        turbine: turbine.clone(),
        ctrl: WindControllerParams::default(),
        layout: FarmLayout::rectangular(3, 2, 7.0 * 2.0 * turbine.r_r, 0.04).unwrap(),
    };
    let solo = WindFarm {
        turbine: waked.turbine.clone(),
        ctrl: waked.ctrl,
        layout: FarmLayout::new(vec![0.0; 6], (0..6).collect(), 0.04).unwrap(),
    };
    let m_waked = waked
        .measure(
            &init_omegas_at_lambda(&waked.layout, &waked.turbine, 10.0, 7.0).unwrap(),
            10.0,
        )
        .unwrap();
    let m_solo = solo
        .measure(
            &init_omegas_at_lambda(&solo.layout, &solo.turbine, 10.0, 7.0).unwrap(),
            10.0,
        )
        .unwrap();
    assert!(
        m_waked.total_power < m_solo.total_power,
        "waked farm must produce strictly less: {} vs {}",
        m_waked.total_power,
        m_solo.total_power
    );

    println!(
        "PASS criterion 7: a(0.75) = 0.25 exact, d_w gap {:.2e} <= 1e-9, \
         wakes cost {:.2}% of farm power",
        (d_w - D_W_REFERENCE).abs(),
        100.0 * (1.0 - m_waked.total_power / m_solo.total_power)
    );
}

// ---------------------------------------------------------------------------
// 8. Six-hour desk scenario: demand tracking, shortfall coverage and the
//    safety envelope, end to end through the scenario pipeline.
//
// The tip-speed-ratio column needs care: each turbine's ratio is certified
// against the wind its controller acted on, and that wind moves between
// steps (free-stream changes arrive through the hold, wake levels shift as
// upstream rotors move). A drop re-measures pinned turbines above the
// barrier and the filter then contracts them at the barrier rate, so the
// honest run-level envelope is the barrier plus the exogenous
// re-measurement drift: twice the largest relative per-tick wind drop
// globally, and a 0.3% wake-shift band while the free wind is quiescent.
// The strict pointwise bound in settled conditions is criterion 2's job.

#[test]
fn criterion_8_six_hour_scenario_tracks_demand() {
    use hpp_core::scenario::{load_scenario, run_scenario, write_signal_csv};
    use hpp_core::sim::SignalSeries;

    let duration = 21_600.0;
    let wind_at = |t: f64| -> f64 {
        // Steady 10.5 m/s with a deep lull: ramp down over a minute, hold
        // near the farm's low capability, ramp back.
        if t < 900.0 {
            10.5
        } else if t < 960.0 {
            10.5 - 4.0 * (t - 900.0) / 60.0
        } else if t < 2640.0 {
            6.5
        } else if t < 2700.0 {
            6.5 + 4.0 * (t - 2640.0) / 60.0
        } else {
            10.5
        }
    };
    let irradiance_at = |t: f64| 1000.0 * (std::f64::consts::PI * t / duration).sin().max(0.0).powf(1.2);
    let demand_at = |t: f64| 52.0e6 + 3.0e6 * (2.0 * std::f64::consts::PI * t / 2400.0).sin();

    let n_samples = duration as usize + 2;
    let series = |f: &dyn Fn(f64) -> f64| {
        SignalSeries::from_pairs((0..n_samples).map(|k| (k as f64, f(k as f64)))).unwrap()
    };

    let dir = tempfile::tempdir().unwrap();
    write_signal_csv(&dir.path().join("wind.csv"), &series(&wind_at)).unwrap();
    write_signal_csv(&dir.path().join("irradiance.csv"), &series(&irradiance_at)).unwrap();
    write_signal_csv(&dir.path().join("demand.csv"), &series(&demand_at)).unwrap();
    std::fs::write(
        dir.path().join("scenario.toml"),
        "duration_s = 21600.0\ndt_s = 0.5\n\n[signals]\nwind = \"wind.csv\"\n\
         irradiance = \"irradiance.csv\"\ndemand = \"demand.csv\"\n",
    )
    .unwrap();

    let sc = load_scenario(&dir.path().join("scenario.toml")).unwrap();
    let rating = sc.supervisor.battery_power_rating;
    let barrier = sc.farm.ctrl.lambda_barrier;
    let started = Instant::now();
    let record = run_scenario(&sc).unwrap();
    let elapsed = started.elapsed().as_secs_f64();

    // Largest relative per-tick drop of the held free wind, from the signal.
    let period = sc.supervisor.update_period_s;
    let n_ticks = (duration / period) as usize;
    let mut max_drop_rel = 0.0f64;
    for k in 1..=n_ticks {
        let (prev, curr) = (wind_at((k - 1) as f64 * period), wind_at(k as f64 * period));
        max_drop_rel = max_drop_rel.max((prev - curr).max(0.0) / curr);
    }
    let envelope = barrier * (1.0 + 2.0 * max_drop_rel);
    let quiescent_band = barrier * 1.003;
    // A row is quiescent when the free wind has not moved in the last 30 s.
    let quiescent = |t: f64| {
        let lag = 30.0f64.min(t);
        (0..=(lag / period) as usize).all(|j| wind_at(t - j as f64 * period) == wind_at(t))
    };

    let mut sum_sq = 0.0f64;
    let mut sum_demand = 0.0f64;
    let mut n_qualifying = 0usize;
    let mut n_shortfall = 0usize;
    let mut min_shortfall_batt = f64::INFINITY;
    let mut max_lambda = f64::NEG_INFINITY;
    let mut max_quiescent_lambda = f64::NEG_INFINITY;

    for row in &record.rows {
        // Battery and solar invariants are strict everywhere.
        assert!(
            row.soc >= sc.battery.z_min - 1e-4 && row.soc <= sc.battery.z_max + 1e-4,
            "t={}: charge {} left the box",
            row.time_s,
            row.soc
        );
        assert!(
            row.cell_current_a.abs() <= sc.battery.i_abs_max() * (1.0 + 1e-6),
            "t={}: cell current {} A outside the envelope",
            row.time_s,
            row.cell_current_a
        );
        assert!(
            row.solar_w >= 0.0 && row.solar_w <= row.solar_avail_w * (1.0 + 1e-9) + 1e-9,
            "t={}: solar output {} exceeds availability {}",
            row.time_s,
            row.solar_w,
            row.solar_avail_w
        );

        let lambda_worst = row.lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max_lambda = max_lambda.max(lambda_worst);
        assert!(
            lambda_worst <= envelope,
            "t={}: tip-speed ratio {lambda_worst} above the drift envelope {envelope}",
            row.time_s
        );
        if quiescent(row.time_s) {
            max_quiescent_lambda = max_quiescent_lambda.max(lambda_worst);
            assert!(
                lambda_worst <= quiescent_band,
                "t={}: tip-speed ratio {lambda_worst} above the quiescent band {quiescent_band}",
                row.time_s
            );
        }

        let avail = row.wind_avail_w + row.solar_avail_w;
        if avail >= row.demand_w + rating {
            n_qualifying += 1;
            sum_sq += (row.total_w - row.demand_w).powi(2);
            sum_demand += row.demand_w;
        }
        if avail < row.demand_w {
            n_shortfall += 1;
            min_shortfall_batt = min_shortfall_batt.min(row.battery_w);
            assert!(
                row.battery_w > 0.0,
                "t={}: battery idle ({} W) during a renewable shortfall",
                row.time_s,
                row.battery_w
            );
        }
    }

    assert!(record.events.is_empty(), "events logged: {:?}", record.events);
    assert!(n_qualifying > 30_000, "only {n_qualifying} qualifying rows");
    assert!(n_shortfall > 1_000, "only {n_shortfall} shortfall rows");
    let mean_demand = sum_demand / n_qualifying as f64;
    let rms = (sum_sq / n_qualifying as f64).sqrt();
    assert!(
        rms < 0.02 * mean_demand,
        "tracking error {rms:.3e} W exceeds 2% of mean demand {mean_demand:.3e} W"
    );
    assert!(elapsed < 60.0, "six-hour run took {elapsed:.1} s");
    println!(
        "PASS criterion 8: rms {:.3}% of demand over {n_qualifying} rows, battery >= \
         {:.1} MW on {n_shortfall} shortfall rows, lambda peak {max_lambda:.4} \
         (envelope {envelope:.4}), quiescent peak {max_quiescent_lambda:.4} \
         (band {quiescent_band:.4}), {elapsed:.1} s",
        100.0 * rms / mean_demand,
        min_shortfall_batt / 1e6
    );
}

// ---------------------------------------------------------------------------
// 9. Determinism and step-size convergence of the shipped scenario.

#[test]
fn criterion_9_determinism_and_dt_convergence() {
    use hpp_core::scenario::{load_config, run_scenario, write_outputs, Scenario};

    let shipped = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios/default.toml");
    let (mut config, base_dir) = load_config(&shipped).unwrap();
    config.duration_s = 600.0;

    let sc = Scenario::from_config(&config, &base_dir).unwrap();
    let first = run_scenario(&sc).unwrap();
    let second = run_scenario(&sc).unwrap();
    assert_eq!(first, second, "identical scenarios must agree bit for bit");

    // The written artifacts must agree byte for byte as well.
    let dir = tempfile::tempdir().unwrap();
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    write_outputs(&sc, &first, &out_a).unwrap();
    write_outputs(&sc, &second, &out_b).unwrap();
    for name in [
        "timeseries.csv",
        "events.csv",
        "summary.txt",
        "resolved_config.toml",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert!(a == b, "{name} differs between identical runs");
    }

    // Halving the step must barely move the terminal states.
    config.dt_s = 0.25;
    let sc_half = Scenario::from_config(&config, &base_dir).unwrap();
    let halved = run_scenario(&sc_half).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-12);
    let mut worst = 0.0f64;
    let (fa, fb) = (&first.final_state, &halved.final_state);
    for (wa, wb) in fa.omegas.iter().zip(&fb.omegas) {
        worst = worst.max(rel(*wa, *wb));
    }
    for (a, b) in [
        (fa.solar.p_s, fb.solar.p_s),
        (fa.solar.e_int, fb.solar.e_int),
        (fa.cell.z, fb.cell.z),
        (fa.cell.i_c, fb.cell.i_c),
        (fa.cell.u1, fb.cell.u1),
        (fa.cell.h, fb.cell.h),
    ] {
        worst = worst.max(rel(a, b));
    }
    assert!(
        worst < 1e-3,
        "halving dt moved a final state by {worst:.3e} relative"
    );
    println!(
        "PASS criterion 9: bit-identical reruns, dt halving moved final states \
         by at most {worst:.2e} relative"
    );
}
