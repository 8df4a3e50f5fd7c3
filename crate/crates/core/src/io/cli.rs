use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::report::OutputFormat;

#[derive(Debug, Clone, Parser)]
#[command(name = "filmarray", version, about = "Thin-film thickness from a seven-sensor reflectometer array")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Base seed for every random draw; overrides scenario seeds.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Fit one sensor from its coated, dark and uncoated frames.
    Fit(FitArgs),
    /// Write synthetic frames and their fits for one or more scenarios.
    Simulate(SimulateArgs),
    /// Run the static tilt/height sweep.
    Sweep(SweepArgs),
    /// Report on a stored session.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, value_name = "CSV")]
    pub coated: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub dark: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub uncoated: PathBuf,
    /// Pixel-to-wavelength calibration (JSON); the nominal one when absent.
    #[arg(long, value_name = "FILE")]
    pub calibration: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub sensor_id: u8,
    #[arg(long, default_value_t = 1000.0)]
    pub integration_time_us: f64,
    /// Ambient dispersion: builtin name or CSV file.
    #[arg(long)]
    pub ambient: Option<String>,
    /// Film dispersion: builtin name or CSV file.
    #[arg(long)]
    pub film: Option<String>,
    /// Substrate dispersion: builtin name or CSV file.
    #[arg(long)]
    pub substrate: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// A scenario or a list of scenarios (JSON).
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub layout: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Grid and sample (JSON); the full grid on the default sample when absent.
    #[arg(long, value_name = "FILE")]
    pub grid: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub layout: Option<PathBuf>,
    /// Runs averaged per cell.
    #[arg(long)]
    pub runs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Session directory or its session.json.
    #[arg(long, value_name = "PATH")]
    pub session: PathBuf,
}
