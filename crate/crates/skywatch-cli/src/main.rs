//! Pipeline driver: scenario simulation, matched detection runs, orbit
//! determination, and link-budget sweeps, all file-based so stages can be
//! inspected and rerun independently.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "skywatch", version, about = "Passive radar space-surveillance pipeline")]
struct Cli {
    /// Worker threads for the data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scenario to IQ recordings plus a truth log.
    Simulate(SimulateArgs),
    /// Run orbit-matched detection over recorded CPIs.
    Detect(DetectArgs),
    /// Fit an orbit to a detections file and report covariance.
    Od(OdArgs),
    /// Sweep incident power over baseline distance and altitude.
    Linkbudget(LinkbudgetArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario noise seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
pub struct DetectArgs {
    /// Scenario JSON (geometry and processing parameters).
    #[arg(long)]
    config: PathBuf,
    /// Directory holding the recordings (as written by simulate).
    #[arg(long)]
    recordings: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Hypothesis source: "truth", "grid", or "file:PATH".
    #[arg(long, default_value = "truth")]
    hypotheses: String,
    /// Delay span of the pulse cubes, ms.
    #[arg(long, default_value_t = 10.0)]
    max_delay_ms: f64,
    /// CFAR threshold, dB.
    #[arg(long, default_value_t = 16.0)]
    threshold_db: f64,
    /// Pruned Doppler window, bins (odd).
    #[arg(long, default_value_t = 201)]
    doppler_window: usize,
    /// Sample the CPI-center range bin instead of tracking per pulse.
    #[arg(long)]
    fixed_bin: bool,
    /// Grid mode: beam azimuth, deg.
    #[arg(long, default_value_t = 0.0)]
    beam_az_deg: f64,
    /// Grid mode: beam elevation, deg.
    #[arg(long, default_value_t = 80.0)]
    beam_el_deg: f64,
    /// Grid mode: altitude range, km.
    #[arg(long, default_value_t = 300.0)]
    alt_min_km: f64,
    #[arg(long, default_value_t = 1200.0)]
    alt_max_km: f64,
    #[arg(long, default_value_t = 20)]
    alt_steps: usize,
    /// Grid mode: heading count over a full circle.
    #[arg(long, default_value_t = 36)]
    headings: usize,
    /// Unused; accepted for interface uniformity.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
pub struct OdArgs {
    /// Scenario JSON (geometry and resolution-derived sigmas).
    #[arg(long)]
    config: PathBuf,
    /// Detections CSV from the detect stage.
    #[arg(long)]
    detections: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Initial state source: "truth:<target_id>" or "file:PATH".
    #[arg(long)]
    x0: String,
    /// Restrict to one hypothesis id (default: best SNR per epoch).
    #[arg(long)]
    hypothesis: Option<String>,
    /// Perturb the initial position by this many meters (random direction).
    #[arg(long, default_value_t = 0.0)]
    perturb_pos_m: f64,
    /// Perturb the initial velocity by this many m/s (random direction).
    #[arg(long, default_value_t = 0.0)]
    perturb_vel_mps: f64,
    /// Seed for the perturbation direction.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Weight measurements by detection SNR.
    #[arg(long)]
    snr_weighting: bool,
}

#[derive(Args)]
pub struct LinkbudgetArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Equivalent isotropically radiated power, W.
    #[arg(long, default_value_t = 1.0e5)]
    eirp_w: f64,
    /// Elevation pattern: "default", "isotropic", or "file:PATH" (JSON
    /// [[elevation_deg, gain_db], ...]).
    #[arg(long, default_value = "default")]
    pattern: String,
    /// Baseline sweep "min:max:steps", km.
    #[arg(long, default_value = "0:3000:61")]
    baseline_km: String,
    /// Altitude sweep "min:max:steps", km.
    #[arg(long, default_value = "200:2000:37")]
    altitude_km: String,
    /// Below-horizon refraction allowance, deg.
    #[arg(long, default_value_t = 2.0)]
    allowance_deg: f64,
}

/// Error type carrying the process exit code.
pub enum CliError {
    /// Bad configuration or inputs: exit code 2.
    Config(String),
    /// Numerical non-convergence: exit code 3.
    NonConvergence(String),
    /// Anything else: exit code 1.
    Other(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Other(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads.is_some() {
        eprintln!("note: built without the parallel feature; --threads ignored");
    }

    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Detect(args) => commands::detect(&args),
        Command::Od(args) => commands::od(&args),
        Command::Linkbudget(args) => commands::linkbudget(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::NonConvergence(msg)) => {
            eprintln!("non-convergence: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
