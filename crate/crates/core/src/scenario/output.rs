//! Run artifacts: timeseries and event CSVs, plot extracts, and a summary
//! that can be recomputed from the files alone.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces every value bit for bit and any recomputed
//! statistic matches the one computed from memory.

use super::{RunRecord, RunRow, Scenario, ScenarioConfig, ScenarioError};
use crate::event::{Event, EventKind};
use std::fmt::Write as _;
use std::path::Path;

/// Aggregate statistics of one run. Every field is recomputable from
/// `timeseries.csv`, `events.csv` and `resolved_config.toml`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunSummary {
    pub rows: usize,
    pub n_turbines: usize,
    pub duration_s: f64,
    pub dt_s: f64,
    pub mean_demand_w: f64,
    pub rms_tracking_error_w: f64,
    /// RMS tracking error over mean demand.
    pub rms_tracking_error_rel: f64,
    /// Fraction of rows where the farm delivered less than its setpoint by
    /// more than the saturation margin.
    pub wind_saturated_fraction: f64,
    pub solar_saturated_fraction: f64,
    /// Fraction of rows with the battery commanded at its power rating.
    pub battery_at_rating_fraction: f64,
    pub min_soc: f64,
    pub max_soc: f64,
    pub max_abs_cell_current_a: f64,
    /// Relative mismatch between the accumulated charge integral and the
    /// state-of-charge change. Closes to integrator tolerance.
    pub energy_bookkeeping_rel_error: f64,
    pub events_wind_qp_infeasible: usize,
    pub events_battery_qp_infeasible: usize,
    pub events_battery_gain_margin_low: usize,
}

impl RunSummary {
    /// Render as `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# hybrid plant run summary");
        let _ = writeln!(
            s,
            "# recomputable from timeseries.csv, events.csv and resolved_config.toml"
        );
        if self.rows == 0 {
            let _ = writeln!(s, "# empty record: statistics are zero by convention");
        }
        let _ = writeln!(s, "rows = {}", self.rows);
        let _ = writeln!(s, "n_turbines = {}", self.n_turbines);
        let _ = writeln!(s, "duration_s = {}", self.duration_s);
        let _ = writeln!(s, "dt_s = {}", self.dt_s);
        let _ = writeln!(s, "mean_demand_w = {}", self.mean_demand_w);
        let _ = writeln!(s, "rms_tracking_error_w = {}", self.rms_tracking_error_w);
        let _ = writeln!(
            s,
            "rms_tracking_error_rel = {}",
            self.rms_tracking_error_rel
        );
        let _ = writeln!(
            s,
            "wind_saturated_fraction = {}",
            self.wind_saturated_fraction
        );
        let _ = writeln!(
            s,
            "solar_saturated_fraction = {}",
            self.solar_saturated_fraction
        );
        let _ = writeln!(
            s,
            "battery_at_rating_fraction = {}",
            self.battery_at_rating_fraction
        );
        let _ = writeln!(s, "min_soc = {}", self.min_soc);
        let _ = writeln!(s, "max_soc = {}", self.max_soc);
        let _ = writeln!(s, "max_abs_cell_current_a = {}", self.max_abs_cell_current_a);
        let _ = writeln!(
            s,
            "energy_bookkeeping_rel_error = {}",
            self.energy_bookkeeping_rel_error
        );
        let _ = writeln!(
            s,
            "events_wind_qp_infeasible = {}",
            self.events_wind_qp_infeasible
        );
        let _ = writeln!(
            s,
            "events_battery_qp_infeasible = {}",
            self.events_battery_qp_infeasible
        );
        let _ = writeln!(
            s,
            "events_battery_gain_margin_low = {}",
            self.events_battery_gain_margin_low
        );
        s
    }

    /// Parse the `to_text` form back.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut map = std::collections::HashMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ScenarioError::Parse {
                path: "summary".into(),
                message: format!("line without '=': {line}"),
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let f = |key: &str| -> Result<f64, ScenarioError> {
            map.get(key)
                .ok_or_else(|| ScenarioError::Parse {
                    path: "summary".into(),
                    message: format!("missing key {key}"),
                })?
                .parse()
                .map_err(|_| ScenarioError::Parse {
                    path: "summary".into(),
                    message: format!("key {key} is not a number"),
                })
        };
        let u = |key: &str| -> Result<usize, ScenarioError> { Ok(f(key)? as usize) };
        Ok(RunSummary {
            rows: u("rows")?,
            n_turbines: u("n_turbines")?,
            duration_s: f("duration_s")?,
            dt_s: f("dt_s")?,
            mean_demand_w: f("mean_demand_w")?,
            rms_tracking_error_w: f("rms_tracking_error_w")?,
            rms_tracking_error_rel: f("rms_tracking_error_rel")?,
            wind_saturated_fraction: f("wind_saturated_fraction")?,
            solar_saturated_fraction: f("solar_saturated_fraction")?,
            battery_at_rating_fraction: f("battery_at_rating_fraction")?,
            min_soc: f("min_soc")?,
            max_soc: f("max_soc")?,
            max_abs_cell_current_a: f("max_abs_cell_current_a")?,
            energy_bookkeeping_rel_error: f("energy_bookkeeping_rel_error")?,
            events_wind_qp_infeasible: u("events_wind_qp_infeasible")?,
            events_battery_qp_infeasible: u("events_battery_qp_infeasible")?,
            events_battery_gain_margin_low: u("events_battery_gain_margin_low")?,
        })
    }
}

fn io_err(path: &Path, source: std::io::Error) -> ScenarioError {
    ScenarioError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> ScenarioError {
    let path_s = path.display().to_string();
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(source) => ScenarioError::Io {
            path: path_s,
            source,
        },
        _ => ScenarioError::Parse {
            path: path_s,
            message,
        },
    }
}

const FIXED_COLUMNS: [&str; 14] = [
    "time_s",
    "demand_w",
    "wind_w",
    "solar_w",
    "battery_w",
    "total_w",
    "wind_avail_w",
    "solar_avail_w",
    "p_wind_sp_w",
    "p_solar_sp_w",
    "p_batt_sp_w",
    "soc",
    "cell_current_a",
    "charge_integral_c",
];

fn kind_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::WindQpInfeasible => "wind_qp_infeasible",
        EventKind::BatteryQpInfeasible => "battery_qp_infeasible",
        EventKind::BatteryGainMarginLow => "battery_gain_margin_low",
    }
}

fn kind_from_name(name: &str) -> Option<EventKind> {
    match name {
        "wind_qp_infeasible" => Some(EventKind::WindQpInfeasible),
        "battery_qp_infeasible" => Some(EventKind::BatteryQpInfeasible),
        "battery_gain_margin_low" => Some(EventKind::BatteryGainMarginLow),
        _ => None,
    }
}

/// Write every run artifact under `out_dir` and return the summary that was
/// stored in `summary.txt`.
pub fn write_outputs(
    sc: &Scenario,
    record: &RunRecord,
    out_dir: &Path,
) -> Result<RunSummary, ScenarioError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let plots = out_dir.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| io_err(&plots, e))?;

    let config_path = out_dir.join("resolved_config.toml");
    std::fs::write(&config_path, &sc.config_echo).map_err(|e| io_err(&config_path, e))?;

    write_timeseries_csv(&out_dir.join("timeseries.csv"), record)?;
    write_events_csv(&out_dir.join("events.csv"), &record.events)?;

    write_powers_plot(&plots.join("powers_vs_time.csv"), &record.rows)?;
    write_demand_plot(&plots.join("demand_vs_total.csv"), &record.rows)?;
    write_soc_plot(&plots.join("soc_vs_time.csv"), &record.rows)?;

    let summary = compute_summary(
        &record.rows,
        record.n_turbines,
        &record.events,
        sc.supervisor.battery_power_rating,
        sc.supervisor.saturation_margin,
        sc.battery.soc_rate_per_amp(),
    );
    let summary_path = out_dir.join("summary.txt");
    std::fs::write(&summary_path, summary.to_text()).map_err(|e| io_err(&summary_path, e))?;
    Ok(summary)
}

fn write_timeseries_csv(path: &Path, record: &RunRecord) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for j in 0..record.n_turbines {
        header.push(format!("lambda_{j}"));
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for row in &record.rows {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        for v in [
            row.time_s,
            row.demand_w,
            row.wind_w,
            row.solar_w,
            row.battery_w,
            row.total_w,
            row.wind_avail_w,
            row.solar_avail_w,
            row.p_wind_sp_w,
            row.p_solar_sp_w,
            row.p_batt_sp_w,
            row.soc,
            row.cell_current_a,
            row.charge_integral_c,
        ] {
            rec.push(v.to_string());
        }
        for &l in &row.lambdas {
            rec.push(l.to_string());
        }
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Read `timeseries.csv` back. The lambda column count is taken from the
/// header, so any turbine count round-trips.
pub fn read_timeseries_csv(path: &Path) -> Result<Vec<RunRow>, ScenarioError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.len() < FIXED_COLUMNS.len() {
        return Err(ScenarioError::Parse {
            path: path.display().to_string(),
            message: format!(
                "expected at least {} columns, found {}",
                FIXED_COLUMNS.len(),
                headers.len()
            ),
        });
    }
    for (i, name) in FIXED_COLUMNS.iter().enumerate() {
        if &headers[i] != *name {
            return Err(ScenarioError::Parse {
                path: path.display().to_string(),
                message: format!("column {i} is '{}', expected '{name}'", &headers[i]),
            });
        }
    }
    let mut rows = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let get = |i: usize| -> Result<f64, ScenarioError> {
            record
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| ScenarioError::Parse {
                    path: path.display().to_string(),
                    message: format!("row {}, column {}: not a number", idx + 2, i + 1),
                })
        };
        let mut lambdas = Vec::with_capacity(headers.len() - FIXED_COLUMNS.len());
        for i in FIXED_COLUMNS.len()..record.len() {
            lambdas.push(get(i)?);
        }
        rows.push(RunRow {
            time_s: get(0)?,
            demand_w: get(1)?,
            wind_w: get(2)?,
            solar_w: get(3)?,
            battery_w: get(4)?,
            total_w: get(5)?,
            wind_avail_w: get(6)?,
            solar_avail_w: get(7)?,
            p_wind_sp_w: get(8)?,
            p_solar_sp_w: get(9)?,
            p_batt_sp_w: get(10)?,
            soc: get(11)?,
            cell_current_a: get(12)?,
            charge_integral_c: get(13)?,
            lambdas,
        });
    }
    Ok(rows)
}

fn write_events_csv(path: &Path, events: &[Event]) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["time_s", "kind", "unit"])
        .map_err(|e| csv_err(path, e))?;
    for ev in events {
        w.write_record([
            ev.time_s.to_string(),
            kind_name(ev.kind).to_string(),
            ev.unit.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_events_csv(path: &Path) -> Result<Vec<Event>, ScenarioError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut events = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let bad = |what: &str| ScenarioError::Parse {
            path: path.display().to_string(),
            message: format!("row {}: {what}", idx + 2),
        };
        if record.len() < 3 {
            return Err(bad("fewer than three columns"));
        }
        let time_s: f64 = record[0].parse().map_err(|_| bad("bad time"))?;
        let kind = kind_from_name(&record[1]).ok_or_else(|| bad("unknown event kind"))?;
        let unit: usize = record[2].parse().map_err(|_| bad("bad unit"))?;
        events.push(Event { time_s, kind, unit });
    }
    Ok(events)
}

fn write_powers_plot(path: &Path, rows: &[RunRow]) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["time_s", "series", "power_w"])
        .map_err(|e| csv_err(path, e))?;
    for row in rows {
        for (name, value) in [
            ("wind", row.wind_w),
            ("solar", row.solar_w),
            ("battery", row.battery_w),
        ] {
            w.write_record([row.time_s.to_string(), name.to_string(), value.to_string()])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_demand_plot(path: &Path, rows: &[RunRow]) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["time_s", "demand_w", "total_w"])
        .map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record([
            row.time_s.to_string(),
            row.demand_w.to_string(),
            row.total_w.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_soc_plot(path: &Path, rows: &[RunRow]) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["time_s", "soc"])
        .map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record([row.time_s.to_string(), row.soc.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn count_kind(events: &[Event], kind: EventKind) -> usize {
    events.iter().filter(|e| e.kind == kind).count()
}

/// The single definition of every summary statistic; both the writer and the
/// file-based recomputation call this.
fn compute_summary(
    rows: &[RunRow],
    n_turbines: usize,
    events: &[Event],
    battery_rating_w: f64,
    saturation_margin: f64,
    soc_rate_per_amp: f64,
) -> RunSummary {
    let n = rows.len();
    let (mut mean_demand, mut sq_err) = (0.0, 0.0);
    let (mut wind_sat, mut solar_sat, mut batt_rated) = (0usize, 0usize, 0usize);
    let (mut min_soc, mut max_soc) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_i = 0.0f64;
    for row in rows {
        mean_demand += row.demand_w;
        let e = row.total_w - row.demand_w;
        sq_err += e * e;
        if row.p_wind_sp_w > 0.0 && row.wind_w < (1.0 - saturation_margin) * row.p_wind_sp_w {
            wind_sat += 1;
        }
        if row.p_solar_sp_w > 0.0 && row.solar_w < (1.0 - saturation_margin) * row.p_solar_sp_w {
            solar_sat += 1;
        }
        if row.p_batt_sp_w.abs() >= (1.0 - 1e-9) * battery_rating_w {
            batt_rated += 1;
        }
        min_soc = min_soc.min(row.soc);
        max_soc = max_soc.max(row.soc);
        max_i = max_i.max(row.cell_current_a.abs());
    }
    let (mean_demand_w, rms) = if n > 0 {
        (mean_demand / n as f64, (sq_err / n as f64).sqrt())
    } else {
        (0.0, 0.0)
    };
    let frac = |c: usize| if n > 0 { c as f64 / n as f64 } else { 0.0 };
    let bookkeeping = match (rows.first(), rows.last()) {
        (Some(first), Some(last)) => {
            let from_soc = (last.soc - first.soc) / soc_rate_per_amp;
            (from_soc - last.charge_integral_c).abs() / last.charge_integral_c.abs().max(1.0)
        }
        _ => 0.0,
    };
    RunSummary {
        rows: n,
        n_turbines,
        duration_s: rows.last().map_or(0.0, |r| r.time_s),
        dt_s: if n >= 2 {
            rows[1].time_s - rows[0].time_s
        } else {
            0.0
        },
        mean_demand_w,
        rms_tracking_error_w: rms,
        rms_tracking_error_rel: if mean_demand_w > 0.0 {
            rms / mean_demand_w
        } else {
            0.0
        },
        wind_saturated_fraction: frac(wind_sat),
        solar_saturated_fraction: frac(solar_sat),
        battery_at_rating_fraction: frac(batt_rated),
        min_soc: if n > 0 { min_soc } else { 0.0 },
        max_soc: if n > 0 { max_soc } else { 0.0 },
        max_abs_cell_current_a: max_i,
        energy_bookkeeping_rel_error: bookkeeping,
        events_wind_qp_infeasible: count_kind(events, EventKind::WindQpInfeasible),
        events_battery_qp_infeasible: count_kind(events, EventKind::BatteryQpInfeasible),
        events_battery_gain_margin_low: count_kind(events, EventKind::BatteryGainMarginLow),
    }
}

/// Recompute the summary of a finished run purely from its artifacts.
pub fn summarize_dir(run_dir: &Path) -> Result<RunSummary, ScenarioError> {
    let ts_path = run_dir.join("timeseries.csv");
    let rows = read_timeseries_csv(&ts_path)?;
    let events = read_events_csv(&run_dir.join("events.csv"))?;
    let config_path = run_dir.join("resolved_config.toml");
    let text = std::fs::read_to_string(&config_path).map_err(|e| io_err(&config_path, e))?;
    let config: ScenarioConfig = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: config_path.display().to_string(),
        message: e.to_string(),
    })?;
    // The lambda column count carries the turbine count even for a run with
    // no rows.
    let mut header_reader = csv::Reader::from_path(&ts_path).map_err(|e| csv_err(&ts_path, e))?;
    let n_turbines = header_reader
        .headers()
        .map_err(|e| csv_err(&ts_path, e))?
        .len()
        .saturating_sub(FIXED_COLUMNS.len());
    Ok(compute_summary(
        &rows,
        n_turbines,
        &events,
        config.supervisor.battery_power_rating,
        config.supervisor.saturation_margin,
        config.battery.params.soc_rate_per_amp(),
    ))
}
