//! Command line front end: run scenarios, validate configs, generate input
//! signals and recompute run summaries.
//!
//! All failures leave a single `error: ...` line on stderr and a nonzero
//! exit code, so wrapping scripts can test and parse the outcome.

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use hpp_core::scenario::{
    generate_synthetic_signals, load_config, run_scenario, summarize_dir, write_outputs,
    write_signal_csv, RunSummary, Scenario, SignalProfile,
};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "hpp-sim",
    version,
    about = "Deterministic hybrid power plant simulator (wind, solar, battery)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its artifacts to a run directory.
    Run {
        /// Scenario TOML file.
        config: PathBuf,
        /// Run directory (default: runs/<config stem>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the integration step, seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the horizon, seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Parse and cross-check a scenario without running it.
    Validate {
        /// Scenario TOML file.
        config: PathBuf,
    },
    /// Generate synthetic wind, irradiance and demand CSVs.
    GenSignals {
        /// Generator seed; identical seeds give identical files.
        seed: u64,
        /// steady, ramping or gusty.
        #[arg(value_parser = SignalProfile::from_str)]
        profile: SignalProfile,
        /// Directory for wind.csv, irradiance.csv and demand.csv.
        #[arg(long, default_value = "signals")]
        out: PathBuf,
        /// Covered span, seconds.
        #[arg(long, default_value_t = 21_600.0)]
        duration: f64,
    },
    /// Recompute a run's summary from its files and check the stored one.
    Summarize {
        /// Directory written by `run`.
        run_dir: PathBuf,
        /// Emit the summary as JSON instead of key = value lines.
        #[arg(long)]
        json: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        // One line, chain flattened, greppable prefix.
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run {
            config,
            out,
            dt,
            duration,
        } => cmd_run(&config, out, dt, duration),
        Command::Validate { config } => cmd_validate(&config),
        Command::GenSignals {
            seed,
            profile,
            out,
            duration,
        } => cmd_gen_signals(seed, profile, &out, duration),
        Command::Summarize { run_dir, json } => cmd_summarize(&run_dir, json),
    }
}

fn load_with_overrides(
    config_path: &Path,
    dt: Option<f64>,
    duration: Option<f64>,
) -> anyhow::Result<Scenario> {
    let (mut config, base_dir) = load_config(config_path)?;
    if let Some(dt) = dt {
        config.dt_s = dt;
    }
    if let Some(duration) = duration {
        config.duration_s = duration;
    }
    // Overrides go through the same validation as file values, so a step
    // that breaks the dispatch alignment fails here, not mid-run.
    Ok(Scenario::from_config(&config, &base_dir)?)
}

fn cmd_run(
    config_path: &Path,
    out: Option<PathBuf>,
    dt: Option<f64>,
    duration: Option<f64>,
) -> anyhow::Result<()> {
    let scenario = load_with_overrides(config_path, dt, duration)?;
    let out_dir = match out {
        Some(dir) => dir,
        None => {
            let stem = config_path
                .file_stem()
                .context("config path has no file name")?;
            PathBuf::from("runs").join(stem)
        }
    };
    let record = run_scenario(&scenario)?;
    let summary = write_outputs(&scenario, &record, &out_dir)?;
    println!(
        "wrote {} ({} rows, {} turbines)",
        out_dir.join("timeseries.csv").display(),
        summary.rows,
        summary.n_turbines
    );
    println!(
        "rms tracking error: {:.3} MW ({:.2}% of mean demand)",
        summary.rms_tracking_error_w / 1e6,
        100.0 * summary.rms_tracking_error_rel
    );
    println!(
        "soc range: [{:.4}, {:.4}], events: {}",
        summary.min_soc,
        summary.max_soc,
        summary.events_wind_qp_infeasible
            + summary.events_battery_qp_infeasible
            + summary.events_battery_gain_margin_low
    );
    Ok(())
}

fn cmd_validate(config_path: &Path) -> anyhow::Result<()> {
    let scenario = hpp_core::scenario::load_scenario(config_path)?;
    println!(
        "ok: {} ({} turbines, {} steps of {} s, {} dispatch updates)",
        config_path.display(),
        scenario.farm.n_turbines(),
        scenario.n_steps(),
        scenario.dt_s,
        scenario.n_steps().div_ceil(scenario.steps_per_update()),
    );
    Ok(())
}

fn cmd_gen_signals(
    seed: u64,
    profile: SignalProfile,
    out: &Path,
    duration: f64,
) -> anyhow::Result<()> {
    if !(duration > 0.0) {
        bail!("--duration must be positive, got {duration}");
    }
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create {}", out.display()))?;
    let signals = generate_synthetic_signals(seed, duration, profile);
    for (name, series) in [
        ("wind.csv", &signals.wind),
        ("irradiance.csv", &signals.irradiance),
        ("demand.csv", &signals.demand),
    ] {
        let path = out.join(name);
        write_signal_csv(&path, series)?;
        println!("wrote {} ({} samples)", path.display(), series.len());
    }
    Ok(())
}

fn cmd_summarize(run_dir: &Path, json: bool) -> anyhow::Result<()> {
    let recomputed = summarize_dir(run_dir)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&recomputed)?);
    } else {
        print!("{}", recomputed.to_text());
    }
    // Cross-check against the stored summary when one exists: a mismatch
    // means the artifacts were edited or the formats drifted.
    let stored_path = run_dir.join("summary.txt");
    if stored_path.exists() {
        let stored = RunSummary::parse(
            &std::fs::read_to_string(&stored_path)
                .with_context(|| format!("cannot read {}", stored_path.display()))?,
        )?;
        let rms_gap = (stored.rms_tracking_error_w - recomputed.rms_tracking_error_w).abs();
        if rms_gap > 1e-9 * stored.rms_tracking_error_w.abs().max(1.0) {
            bail!(
                "stored rms {} disagrees with recomputed rms {}",
                stored.rms_tracking_error_w,
                recomputed.rms_tracking_error_w
            );
        }
        if stored != recomputed {
            bail!("stored summary disagrees with recomputation from artifacts");
        }
    }
    Ok(())
}
