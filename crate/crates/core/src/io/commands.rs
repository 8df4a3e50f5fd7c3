use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use super::cli::{Cli, Command, FitArgs, ReportArgs, SimulateArgs, SweepArgs};
use super::config::{LoadedLayout, RunConfig, SweepSpec};
use super::files::{load_json, read_text, parse_json, to_json, write_text};
use super::report::{doe_csv, doe_summary, render_fit, render_session, OutputFormat};
use super::session::{simulate_session, SeedSource, SessionRecord, SESSION_FILE};
use crate::array::{fit_sensor, InspectionVerdict, SensorInput};
use crate::error::{Error, Result};
use crate::fitcore::FitResult;
use crate::simkit::{run_doe, Scenario, Simulator};
use crate::spectra::{FrameKind, PixelCalibration, SpectrumFrame};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// At least one gate failed or one cell fell outside the inspection box.
    GateFail,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::GateFail => 2,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::GateFail
        }
    }
}

pub const ERROR_EXIT: u8 = 1;

pub fn exit_code(result: &Result<Outcome>) -> ExitCode {
    ExitCode::from(match result {
        Ok(o) => o.code(),
        Err(_) => ERROR_EXIT,
    })
}

fn ext(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Text => "txt",
        OutputFormat::Csv => "csv",
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn load_layout(path: Option<&Path>) -> Result<LoadedLayout> {
    match path {
        Some(p) => LoadedLayout::load(p),
        None => Ok(LoadedLayout::default_layout()),
    }
}

fn generated_seed() -> u64 {
    // Kept below 2^53 so the seed survives any JSON reader.
    rand::random::<u64>() >> 11
}

/// Dispatches one parsed command line, writing the report to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(cli, a, stdout),
        Command::Simulate(a) => cmd_simulate(cli, a, stdout),
        Command::Sweep(a) => cmd_sweep(cli, a, stdout),
        Command::Report(a) => cmd_report(cli, a, stdout),
    }
}

pub fn cmd_fit(cli: &Cli, args: &FitArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let mut config = load_config(cli)?;
    for (slot, value) in [
        (&mut config.materials.ambient, &args.ambient),
        (&mut config.materials.film, &args.film),
        (&mut config.materials.substrate, &args.substrate),
    ] {
        if let Some(v) = value {
            *slot = v.clone();
        }
    }
    let defaults = LoadedLayout::default_layout();
    let mut channel = defaults
        .layout
        .channel(args.sensor_id)
        .cloned()
        .ok_or_else(|| Error::Config(format!("sensor id {} outside 1..=7", args.sensor_id)))?;
    if let Some(p) = &args.calibration {
        channel.calibration = PixelCalibration::load(p)?;
    }
    let frame = |p: &PathBuf, kind| SpectrumFrame::load(p, args.sensor_id, args.integration_time_us, kind);
    let pipeline = config.pipeline(defaults.zone_map)?;
    let input = SensorInput {
        session: pipeline.session(
            &channel,
            frame(&args.uncoated, FrameKind::Uncoated)?,
            frame(&args.dark, FrameKind::Dark)?,
        )?,
        coated: frame(&args.coated, FrameKind::Coated)?,
    };
    let fit: FitResult = fit_sensor(&channel, &input, &pipeline)?;
    let text = render_fit(&fit, cli.format);
    stdout.write_all(text.as_bytes())?;
    if let Some(out) = &cli.out {
        write_text(&out.join("fit.json"), &to_json(&fit)?)?;
        write_text(&out.join(format!("fit.{}", ext(cli.format))), &text)?;
    }
    Ok(Outcome::from_pass(fit.gate.passed()))
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = read_text(path)?;
    // Dispatch on the top-level shape so schema errors keep their field path.
    let scenarios: Vec<Scenario> = if text.trim_start().starts_with('[') {
        parse_json(&text, path)?
    } else {
        vec![parse_json(&text, path)?]
    };
    for s in &scenarios {
        s.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: None,
            message: format!("scenario `{}`: {e}", s.name),
        })?;
    }
    Ok(scenarios)
}

pub fn cmd_simulate(cli: &Cli, args: &SimulateArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("simulate needs --out".into()))?;
    let config = load_config(cli)?;
    let layout = load_layout(args.layout.as_deref())?;
    let scenarios = load_scenarios(&args.scenario)?;
    let (seed, source) = match (cli.seed, scenarios.iter().find_map(|s| s.seed)) {
        (Some(s), _) => (s, SeedSource::Flag),
        (None, Some(s)) => (s, SeedSource::Scenario),
        (None, None) => (generated_seed(), SeedSource::Generated),
    };
    let layout_source = args.layout.as_ref().map(|p| p.display().to_string());
    let session = simulate_session(&scenarios, &layout, layout_source, &config, seed, source, out)?;
    let text = render_session(&session, cli.format);
    stdout.write_all(text.as_bytes())?;
    write_text(&out.join(format!("report.{}", ext(cli.format))), &text)?;
    Ok(Outcome::from_pass(!session.alignment_required()))
}

pub fn cmd_sweep(cli: &Cli, args: &SweepArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let config = load_config(cli)?;
    let layout = load_layout(args.layout.as_deref())?;
    let mut spec = match &args.grid {
        Some(p) => load_json::<SweepSpec>(p)?,
        None => {
            let mut s = SweepSpec::default();
            s.grid.runs_per_cell = config.simulator.runs_per_cell;
            s
        }
    };
    if let Some(r) = args.runs {
        spec.grid.runs_per_cell = r;
    }
    spec.grid.validate()?;
    let stack = spec.sample.stack()?;
    let sim = Simulator::new(
        layout.layout.clone(),
        stack.clone(),
        config.simulator.coupling_model()?,
        config.simulator.noise,
        config.simulator.exposure,
    )?;
    let pipeline = config.pipeline_for(stack, layout.zone_map)?;
    let seed = cli.seed.unwrap_or_else(generated_seed);
    let table = run_doe(&sim, &spec.grid, &pipeline, seed)?;
    let summary = doe_summary(&table, cli.format);
    stdout.write_all(summary.as_bytes())?;
    if let Some(out) = &cli.out {
        write_text(&out.join("doe.csv"), &doe_csv(&table))?;
        write_text(&out.join("summary.csv"), &doe_summary(&table, OutputFormat::Csv))?;
        write_text(&out.join("doe.json"), &to_json(&table)?)?;
    }
    let inside = table.cells.iter().all(|c| c.verdict == InspectionVerdict::Inside);
    Ok(Outcome::from_pass(inside))
}

pub fn session_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(SESSION_FILE)
    } else {
        path.to_path_buf()
    }
}

pub fn cmd_report(cli: &Cli, args: &ReportArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let session = SessionRecord::load(&session_path(&args.session))?;
    let text = render_session(&session, cli.format);
    stdout.write_all(text.as_bytes())?;
    if let Some(out) = &cli.out {
        write_text(&out.join(format!("report.{}", ext(cli.format))), &text)?;
    }
    Ok(Outcome::from_pass(!session.alignment_required()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("filmarray").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Outcome::Pass.code(), 0);
        assert_eq!(Outcome::GateFail.code(), 2);
        assert_eq!(exit_code(&Err(Error::EmptyInput)), ExitCode::from(1));
    }

    #[test]
    fn global_flags_after_the_verb() {
        let c = cli(&["report", "--session", "s", "--format", "csv", "--seed", "4"]);
        assert_eq!(c.format, OutputFormat::Csv);
        assert_eq!(c.seed, Some(4));
        assert!(Cli::try_parse_from(["filmarray", "report", "--session", "s", "--format", "xml"]).is_err());
    }

    #[test]
    fn scenario_file_one_or_many() {
        let dir = tempfile::tempdir().unwrap();
        let one = dir.path().join("one.json");
        std::fs::write(&one, r#"{"name": "a", "tilt_axis": "left", "tilt_deg": 0.5}"#).unwrap();
        assert_eq!(load_scenarios(&one).unwrap().len(), 1);
        let many = dir.path().join("many.json");
        std::fs::write(&many, r#"[{"name": "a"}, {"name": "b", "seed": 3}]"#).unwrap();
        assert_eq!(load_scenarios(&many).unwrap()[1].seed, Some(3));
        std::fs::write(&many, r#"[{"name": "a"}, {"name": "b", "sample": {"thickness_nm": "thick"}}]"#).unwrap();
        let err = load_scenarios(&many).unwrap_err().to_string();
        assert!(err.contains("[1].sample.thickness_nm"), "{err}");
    }

    #[test]
    fn simulate_needs_out() {
        let c = cli(&["simulate", "--scenario", "x.json"]);
        assert!(run(&c, &mut Vec::new()).is_err());
    }

    #[test]
    fn single_cell_sweep_writes_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let grid = dir.path().join("grid.json");
        std::fs::write(
            &grid,
            r#"{"grid": {"rows": [{"axis": "right", "angle_deg": 0.5}], "heights_mm": [1.0], "runs_per_cell": 1}}"#,
        )
        .unwrap();
        let cfg = dir.path().join("cfg.json");
        std::fs::write(&cfg, r#"{"n_starts": 12}"#).unwrap();
        let out = dir.path().join("out");
        let c = cli(&[
            "sweep",
            "--grid",
            grid.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "1",
            "--out",
            out.to_str().unwrap(),
        ]);
        let mut stdout = Vec::new();
        let outcome = run(&c, &mut stdout).unwrap();
        let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 2);
        assert_eq!(outcome, Outcome::GateFail);
        assert!(summary.lines().nth(1).unwrap().starts_with("right,0.5,1,outside,"));
    }
}
