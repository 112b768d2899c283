//! Scenario configuration, the simulation loop, and run outputs.
//!
//! A scenario is one TOML file plus the signal and curve CSVs it references.
//! Every parameter is optional: omitted fields fall back to the built-in
//! plant (8x4 farm of 5 MW turbines, 50 MW solar plant, 160 MWh battery,
//! 1 s dispatch), and the fully resolved configuration is echoed into the
//! run outputs so a run is reproducible from its own artifacts.

mod output;
mod run;
mod signals;

pub use output::{read_timeseries_csv, summarize_dir, write_outputs, RunSummary};
pub use run::{run_scenario, FinalState, RunRecord, RunRow};
pub use signals::{
    generate_synthetic_signals, read_curve_csv, read_signal_csv, write_signal_csv, SignalProfile,
    SyntheticSignals,
};

use crate::battery::{BatteryError, BatteryParams, OcvCurve};
use crate::sim::{Interpolation, SignalSeries, SimError};
use crate::solar::{SolarError, SolarParams, SolarState};
use crate::supervisor::{SupervisorError, SupervisorParams};
use crate::wind::{
    FarmLayout, PowerCurve, TurbineParams, WindControllerParams, WindError, WindFarm,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario: {invariant}")]
    Validation { invariant: String },
    #[error("at t = {t_s} s: {source}")]
    AtTime {
        t_s: f64,
        #[source]
        source: Box<ScenarioError>,
    },
    #[error(transparent)]
    Wind(#[from] WindError),
    #[error(transparent)]
    Solar(#[from] SolarError),
    #[error(transparent)]
    Battery(#[from] BatteryError),
    #[error(transparent)]
    Supervisor(#[from] SupervisorError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl ScenarioError {
    fn invalid(invariant: impl Into<String>) -> Self {
        ScenarioError::Validation {
            invariant: invariant.into(),
        }
    }

    pub(crate) fn at(t_s: f64, source: impl Into<ScenarioError>) -> Self {
        ScenarioError::AtTime {
            t_s,
            source: Box::new(source.into()),
        }
    }
}

/// On-disk scenario schema. Everything has a default; unknown keys are
/// rejected so typos fail loudly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub duration_s: f64,
    pub dt_s: f64,
    /// Used by synthetic-signal generation only; recorded for provenance.
    pub seed: u64,
    pub signals: SignalsConfig,
    pub farm: FarmConfig,
    pub solar: SolarConfig,
    pub battery: BatteryConfig,
    pub supervisor: SupervisorParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            schema_version: 1,
            duration_s: 21_600.0,
            dt_s: 0.5,
            seed: 42,
            signals: SignalsConfig::default(),
            farm: FarmConfig::default(),
            solar: SolarConfig::default(),
            battery: BatteryConfig::default(),
            supervisor: SupervisorParams::default(),
        }
    }
}

/// Signal file references, relative to the scenario file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalsConfig {
    pub wind: PathBuf,
    pub irradiance: PathBuf,
    pub demand: PathBuf,
    /// How signals are read between samples.
    pub interpolation: Interpolation,
}

impl Default for SignalsConfig {
    fn default() -> Self {
        SignalsConfig {
            wind: PathBuf::from("signals/wind.csv"),
            irradiance: PathBuf::from("signals/irradiance.csv"),
            demand: PathBuf::from("signals/demand.csv"),
            interpolation: Interpolation::Zoh,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FarmConfig {
    /// Turbine rows along the wind direction.
    pub rows: u32,
    /// Columns across it.
    pub cols: u32,
    /// Row spacing in rotor diameters.
    pub spacing_diameters: f64,
    /// Wake expansion coefficient.
    pub k_w: f64,
    /// Every rotor starts at this tip-speed ratio against its own wake-level
    /// wind.
    pub initial_tip_speed_ratio: f64,
    /// Optional CSV curve overrides (lambda, coefficient).
    pub cp_curve: Option<PathBuf>,
    pub ct_curve: Option<PathBuf>,
    pub turbine: TurbineConfig,
    pub controller: ControllerConfig,
}

impl Default for FarmConfig {
    fn default() -> Self {
        FarmConfig {
            rows: 8,
            cols: 4,
            spacing_diameters: 7.0,
            k_w: 0.04,
            initial_tip_speed_ratio: 7.0,
            cp_curve: None,
            ct_curve: None,
            turbine: TurbineConfig::default(),
            controller: ControllerConfig::default(),
        }
    }
}

/// Scalar turbine overrides; the swept area is always derived from the
/// radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineConfig {
    pub rho: f64,
    pub rotor_radius_m: f64,
    pub inertia_kg_m2: f64,
    pub rated_power_w: f64,
    pub tg_max_n_m: f64,
    pub u_min_m_s: f64,
    pub omega_floor_rad_s: f64,
}

impl Default for TurbineConfig {
    fn default() -> Self {
        let t = TurbineParams::default();
        TurbineConfig {
            rho: t.rho,
            rotor_radius_m: t.r_r,
            inertia_kg_m2: t.j_r,
            rated_power_w: t.rated_power,
            tg_max_n_m: t.tg_max,
            u_min_m_s: t.u_min,
            omega_floor_rad_s: t.omega_floor,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub k: f64,
    pub c_w: f64,
    pub lambda_barrier: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let c = WindControllerParams::default();
        ControllerConfig {
            k: c.k,
            c_w: c.c_w,
            lambda_barrier: c.lambda_barrier,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolarConfig {
    pub area_m2: f64,
    pub efficiency: f64,
    pub tau_s: f64,
    pub kp: f64,
    pub ki: f64,
    pub initial_power_w: f64,
    pub initial_error_integral: f64,
}

impl Default for SolarConfig {
    fn default() -> Self {
        let s = SolarParams::default();
        SolarConfig {
            area_m2: s.area_m2,
            efficiency: s.efficiency,
            tau_s: s.tau_s,
            kp: s.kp,
            ki: s.ki,
            initial_power_w: 0.0,
            initial_error_integral: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub initial_soc: f64,
    /// Optional CSV override for the open-circuit voltage curve
    /// (soc, volts); takes precedence over `params.ocv`.
    pub ocv_curve: Option<PathBuf>,
    pub params: BatteryParams,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            initial_soc: 0.5,
            ocv_curve: None,
            params: BatteryParams::default(),
        }
    }
}

/// A fully validated, ready-to-run scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
    pub wind_signal: SignalSeries,
    pub irradiance_signal: SignalSeries,
    pub demand_signal: SignalSeries,
    pub interpolation: Interpolation,
    pub farm: WindFarm,
    pub initial_tip_speed_ratio: f64,
    pub solar: SolarParams,
    pub solar_init: SolarState,
    pub battery: BatteryParams,
    pub initial_soc: f64,
    pub supervisor: SupervisorParams,
    /// The configuration actually used, defaults applied, as TOML.
    pub config_echo: String,
}

impl Scenario {
    /// Dynamics steps per dispatch update.
    pub fn steps_per_update(&self) -> usize {
        (self.supervisor.update_period_s / self.dt_s).round() as usize
    }

    /// Number of integration steps; the record has one more row.
    pub fn n_steps(&self) -> usize {
        (self.duration_s / self.dt_s).floor() as usize
    }

    /// Build and cross-validate a scenario from its parsed form.
    ///
    /// `base_dir` anchors the relative signal and curve paths.
    pub fn from_config(config: &ScenarioConfig, base_dir: &Path) -> Result<Self, ScenarioError> {
        if config.schema_version != 1 {
            return Err(ScenarioError::invalid(format!(
                "schema_version {} is not supported (expected 1)",
                config.schema_version
            )));
        }
        if !(config.duration_s > 0.0) {
            return Err(ScenarioError::invalid("duration_s must be positive"));
        }
        if !(config.dt_s > 0.0) {
            return Err(ScenarioError::invalid("dt_s must be positive"));
        }
        if config.dt_s > config.duration_s {
            return Err(ScenarioError::invalid("dt_s must not exceed duration_s"));
        }

        let period = config.supervisor.update_period_s;
        let ratio = period / config.dt_s;
        if !(ratio >= 1.0 - 1e-9) {
            return Err(ScenarioError::invalid(
                "supervisor.update_period_s must be at least dt_s",
            ));
        }
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(ScenarioError::invalid(
                "supervisor.update_period_s must be an integer multiple of dt_s",
            ));
        }

        let t = &config.farm.turbine;
        let cp_points = match &config.farm.cp_curve {
            Some(rel) => read_curve_csv(&base_dir.join(rel))?,
            None => crate::wind::default_cp_points(),
        };
        let ct_points = match &config.farm.ct_curve {
            Some(rel) => read_curve_csv(&base_dir.join(rel))?,
            None => crate::wind::default_ct_points(),
        };
        let turbine = TurbineParams::new(
            t.rho,
            t.rotor_radius_m,
            t.inertia_kg_m2,
            t.rated_power_w,
            t.tg_max_n_m,
            t.u_min_m_s,
            t.omega_floor_rad_s,
            PowerCurve::power_coefficient(cp_points)?,
            PowerCurve::thrust_coefficient(ct_points)?,
        )?;
        let c = &config.farm.controller;
        let ctrl = WindControllerParams::new(c.k, c.c_w, c.lambda_barrier)?;
        if config.farm.rows == 0 || config.farm.cols == 0 {
            return Err(ScenarioError::invalid(
                "farm.rows and farm.cols must be at least 1",
            ));
        }
        if !(config.farm.spacing_diameters > 0.0) {
            return Err(ScenarioError::invalid(
                "farm.spacing_diameters must be positive",
            ));
        }
        let spacing_m = config.farm.spacing_diameters * 2.0 * turbine.r_r;
        let layout = FarmLayout::rectangular(
            config.farm.rows as usize,
            config.farm.cols as usize,
            spacing_m,
            config.farm.k_w,
        )?;
        let lambda0 = config.farm.initial_tip_speed_ratio;
        if !(lambda0 > 0.0 && lambda0 <= ctrl.lambda_barrier) {
            return Err(ScenarioError::invalid(
                "farm.initial_tip_speed_ratio must lie in (0, lambda_barrier]",
            ));
        }

        let s = &config.solar;
        let solar = SolarParams::new(s.area_m2, s.efficiency, s.tau_s, s.kp, s.ki)?;
        let solar_init = SolarState {
            p_s: s.initial_power_w,
            e_int: s.initial_error_integral,
        };

        let mut battery = config.battery.params.clone();
        if let Some(rel) = &config.battery.ocv_curve {
            battery.ocv = OcvCurve::from_points(read_curve_csv(&base_dir.join(rel))?)?;
        }
        battery.validate()?;
        let z0 = config.battery.initial_soc;
        if !(battery.z_min <= z0 && z0 <= battery.z_max) {
            return Err(ScenarioError::invalid(
                "battery.initial_soc must lie in [z_min, z_max]",
            ));
        }

        config
            .supervisor
            .validate(battery.z_min, battery.z_max)?;

        let wind_signal = read_signal_csv(&base_dir.join(&config.signals.wind))?;
        let irradiance_signal = read_signal_csv(&base_dir.join(&config.signals.irradiance))?;
        let demand_signal = read_signal_csv(&base_dir.join(&config.signals.demand))?;
        for (name, sig) in [
            ("wind", &wind_signal),
            ("irradiance", &irradiance_signal),
            ("demand", &demand_signal),
        ] {
            if sig.first_time() > 0.0 || sig.last_time() < config.duration_s {
                return Err(ScenarioError::invalid(format!(
                    "{name} signal must cover [0, duration_s]; it spans [{}, {}]",
                    sig.first_time(),
                    sig.last_time()
                )));
            }
        }
        if wind_signal.iter().any(|(_, v)| !(v > 0.0)) {
            return Err(ScenarioError::invalid("wind samples must be positive"));
        }
        if irradiance_signal.iter().any(|(_, v)| v < 0.0) {
            return Err(ScenarioError::invalid(
                "irradiance samples must be nonnegative",
            ));
        }
        if demand_signal.iter().any(|(_, v)| v < 0.0) {
            return Err(ScenarioError::invalid("demand samples must be nonnegative"));
        }

        let config_echo = toml::to_string_pretty(config).map_err(|e| ScenarioError::Parse {
            path: "<resolved config>".into(),
            message: e.to_string(),
        })?;

        Ok(Scenario {
            duration_s: config.duration_s,
            dt_s: config.dt_s,
            seed: config.seed,
            wind_signal,
            irradiance_signal,
            demand_signal,
            interpolation: config.signals.interpolation,
            farm: WindFarm {
                turbine,
                ctrl,
                layout,
            },
            initial_tip_speed_ratio: lambda0,
            solar,
            solar_init,
            battery,
            initial_soc: z0,
            supervisor: config.supervisor,
            config_echo,
        })
    }
}

/// Parse a scenario file without cross-validating it. Returns the config and
/// the directory that relative paths inside it resolve against, so callers
/// can apply overrides before building the scenario.
pub fn load_config(path: &Path) -> Result<(ScenarioConfig, PathBuf), ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config: ScenarioConfig = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    Ok((config, base_dir))
}

/// Read and validate a scenario file. Relative paths inside it resolve
/// against its own directory.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let (config, base_dir) = load_config(path)?;
    Scenario::from_config(&config, &base_dir)
}
