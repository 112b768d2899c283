//! Synthetic input signals and the CSV forms signals and curves travel in.
//!
//! The generator exists because the demand and resource recordings a real
//! plant would replay are not redistributable; these series are shaped to
//! exercise the same behaviors (diurnal solar, banded wind, slow demand
//! walk) while being exactly reproducible from a seed.

use super::ScenarioError;
use crate::sim::SignalSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

/// Character of the generated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalProfile {
    /// Near-constant wind and demand; clean irradiance bump.
    Steady,
    /// Slow sweeps across the operating range.
    Ramping,
    /// Banded turbulence, cloud shadows and a livelier demand walk.
    Gusty,
}

impl FromStr for SignalProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "steady" => Ok(SignalProfile::Steady),
            "ramping" => Ok(SignalProfile::Ramping),
            "gusty" => Ok(SignalProfile::Gusty),
            other => Err(format!(
                "unknown profile '{other}' (expected steady, ramping or gusty)"
            )),
        }
    }
}

/// One generated input set, sampled at 1 s.
#[derive(Debug, Clone)]
pub struct SyntheticSignals {
    pub wind: SignalSeries,
    pub irradiance: SignalSeries,
    pub demand: SignalSeries,
}

/// Uniform innovation with unit variance; bounded, which keeps the walks
/// inside their clamps without distributional tails.
fn innovation(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0f64..1.0) * 3.0f64.sqrt()
}

/// Generate wind (m/s), irradiance (W/m^2) and demand (W) series covering
/// `[0, duration_s]` at 1 s spacing. Identical arguments give identical
/// series.
pub fn generate_synthetic_signals(
    seed: u64,
    duration_s: f64,
    profile: SignalProfile,
) -> SyntheticSignals {
    assert!(duration_s > 0.0, "signal generation needs a positive span");
    let n = duration_s.ceil() as usize + 2;
    let times: Vec<f64> = (0..n).map(|k| k as f64).collect();

    // Independent streams of one keyed generator: the signals stay
    // uncorrelated and each is stable under changes to the others.
    let mut rng_wind = ChaCha8Rng::seed_from_u64(seed);
    rng_wind.set_stream(1);
    let mut rng_irr = ChaCha8Rng::seed_from_u64(seed);
    rng_irr.set_stream(2);
    let mut rng_dem = ChaCha8Rng::seed_from_u64(seed);
    rng_dem.set_stream(3);

    // Wind: mean-reverting walk around 10 m/s, profile setting the band.
    let (theta_w, sigma_w) = match profile {
        SignalProfile::Steady => (0.1, 0.01),
        SignalProfile::Ramping => (0.1, 0.02),
        SignalProfile::Gusty => (0.02, 0.22),
    };
    let mut xw = 0.0;
    let wind: Vec<f64> = times
        .iter()
        .map(|&t| {
            xw += -theta_w * xw + sigma_w * innovation(&mut rng_wind);
            let swept = match profile {
                // A slow sweep through the band on top of the noise.
                SignalProfile::Ramping => 1.5 * (2.0 * std::f64::consts::PI * t / duration_s).sin(),
                _ => 0.0,
            };
            (10.0 + swept + xw).clamp(4.0, 15.0)
        })
        .collect();

    // Irradiance: one daylight bump spanning the run, 0 to 1000 W/m^2, with
    // cloud shadows in the gusty profile.
    let mut cloud = 0.0f64;
    let irradiance: Vec<f64> = times
        .iter()
        .map(|&t| {
            let phase = (std::f64::consts::PI * t / duration_s).sin().max(0.0);
            let clear = 1000.0 * phase.powf(1.2);
            let shading = match profile {
                SignalProfile::Gusty => {
                    cloud += -0.01 * cloud + 0.03 * innovation(&mut rng_irr);
                    cloud = cloud.clamp(0.0, 0.45);
                    1.0 - cloud
                }
                _ => 1.0,
            };
            (clear * shading).clamp(0.0, 1000.0)
        })
        .collect();

    // Demand: band-limited walk, clamped to the plant rating. The mean sits
    // where the default plant can carry it with battery headroom to spare.
    const PLANT_RATING_W: f64 = 250.0e6;
    let (base, theta_d, sigma_d, swing) = match profile {
        SignalProfile::Steady => (48.0e6, 0.05, 0.1e6, 0.0),
        SignalProfile::Ramping => (48.0e6, 0.05, 0.2e6, 14.0e6),
        SignalProfile::Gusty => (48.0e6, 0.005, 0.9e6, 10.0e6),
    };
    let mut xd = 0.0f64;
    let demand: Vec<f64> = times
        .iter()
        .map(|&t| {
            xd += -theta_d * xd + sigma_d * innovation(&mut rng_dem);
            let sweep = swing * (2.0 * std::f64::consts::PI * t / duration_s).sin();
            (base + sweep + xd).clamp(0.0, PLANT_RATING_W)
        })
        .collect();

    SyntheticSignals {
        wind: SignalSeries::new(times.clone(), wind).expect("generated series is valid"),
        irradiance: SignalSeries::new(times.clone(), irradiance)
            .expect("generated series is valid"),
        demand: SignalSeries::new(times, demand).expect("generated series is valid"),
    }
}

/// Write a series as `time_s,value` CSV.
pub fn write_signal_csv(path: &Path, series: &SignalSeries) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["time_s", "value"])
        .map_err(|e| csv_err(path, e))?;
    for (t, v) in series.iter() {
        w.write_record([t.to_string(), v.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Read a `time_s,value` CSV back into a series.
pub fn read_signal_csv(path: &Path) -> Result<SignalSeries, ScenarioError> {
    let pairs = read_curve_csv(path)?;
    SignalSeries::from_pairs(pairs).map_err(ScenarioError::Sim)
}

/// Read any two-column numeric CSV with a header row as (x, y) pairs.
/// Used for signals, power curves and the voltage table alike.
pub fn read_curve_csv(path: &Path) -> Result<Vec<(f64, f64)>, ScenarioError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut pairs = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if record.len() < 2 {
            return Err(ScenarioError::Parse {
                path: path.display().to_string(),
                message: format!("row {} has fewer than two columns", idx + 2),
            });
        }
        let parse = |field: &str, col: &str| {
            field.trim().parse::<f64>().map_err(|_| ScenarioError::Parse {
                path: path.display().to_string(),
                message: format!("row {}, column {col}: '{field}' is not a number", idx + 2),
            })
        };
        pairs.push((parse(&record[0], "1")?, parse(&record[1], "2")?));
    }
    Ok(pairs)
}

fn csv_err(path: &Path, e: csv::Error) -> ScenarioError {
    let path = path.display().to_string();
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(source) => ScenarioError::Io { path, source },
        _ => ScenarioError::Parse { path, message },
    }
}
