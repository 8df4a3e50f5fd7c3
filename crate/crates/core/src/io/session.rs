use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{LayoutFile, LoadedLayout, RunConfig};
use super::files::{load_json, to_json, write_text};
use crate::array::{measure_and_fuse, ArrayMeasurement, FusionReport, SensorInput};
use crate::error::{Error, Result};
use crate::simkit::{run_rng, Scenario, Simulator};
use crate::spectra::{FrameKind, SpectrumFrame};

pub const SESSION_FILE: &str = "session.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Flag,
    Scenario,
    Generated,
}

impl SeedSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SeedSource::Flag => "flag",
            SeedSource::Scenario => "scenario",
            SeedSource::Generated => "generated",
        }
    }
}

/// Metadata sidecar of one frame CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFile {
    /// Relative to the session directory.
    pub path: String,
    pub sensor_id: u8,
    pub kind: FrameKind,
    pub integration_time_us: f64,
}

impl FrameFile {
    pub fn load(&self, session_dir: &Path) -> Result<SpectrumFrame> {
        SpectrumFrame::load(&session_dir.join(&self.path), self.sensor_id, self.integration_time_us, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub sequence: u64,
    pub step: String,
    pub coated: Vec<FrameFile>,
    pub measurement: ArrayMeasurement,
    pub report: FusionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub name: String,
    /// The scenario as run, with its seed filled in.
    pub scenario: Scenario,
    pub true_thickness_nm: f64,
    /// Uncoated and dark frames of the calibration session.
    pub calibration: Vec<FrameFile>,
    pub measurements: Vec<MeasurementRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub seed_source: SeedSource,
}

/// Everything needed to report on, or re-fit, a simulated session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout_source: Option<String>,
    pub layout: LayoutFile,
    pub config: RunConfig,
    pub scenarios: Vec<ScenarioRecord>,
}

impl SessionRecord {
    pub fn load(path: &Path) -> Result<Self> {
        load_json(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &to_json(self)?)
    }

    /// True when any stored reading asked for realignment.
    pub fn alignment_required(&self) -> bool {
        self.scenarios
            .iter()
            .flat_map(|s| &s.measurements)
            .any(|m| m.report.alignment_required)
    }
}

fn dir_name(index: usize, scenario: &Scenario) -> String {
    let clean: String = scenario
        .name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if clean.is_empty() {
        format!("scenario{}", index + 1)
    } else {
        format!("{:02}_{clean}", index + 1)
    }
}

fn write_frame(out_dir: &Path, rel: String, frame: &SpectrumFrame) -> Result<FrameFile> {
    write_text(&out_dir.join(&rel), &frame.to_csv_string())?;
    Ok(FrameFile {
        path: rel,
        sensor_id: frame.sensor_id(),
        kind: frame.kind(),
        integration_time_us: frame.integration_time_us(),
    })
}

/// Simulates every scenario into `out_dir`: frame CSVs plus their fits.
///
/// Scenario `i` draws from stream `i` of its seed.
pub fn simulate_session(
    scenarios: &[Scenario],
    layout: &LoadedLayout,
    layout_source: Option<String>,
    config: &RunConfig,
    seed: u64,
    seed_source: SeedSource,
    out_dir: &Path,
) -> Result<SessionRecord> {
    if scenarios.is_empty() {
        return Err(Error::InvalidScenario("no scenarios given".into()));
    }
    let mut records = Vec::with_capacity(scenarios.len());
    for (i, scenario) in scenarios.iter().enumerate() {
        scenario.validate()?;
        let mut scenario = scenario.clone();
        let scenario_seed = match seed_source {
            SeedSource::Flag | SeedSource::Generated => seed,
            SeedSource::Scenario => scenario.seed.unwrap_or(seed),
        };
        scenario.seed = Some(scenario_seed);
        let coupling = match &scenario.coupling {
            Some(c) => c.clone(),
            None => config.simulator.coupling_model()?,
        };
        let stack = scenario.sample.stack()?;
        let sim = Simulator::new(layout.layout.clone(), stack.clone(), coupling, scenario.noise, config.simulator.exposure)?;
        let pipeline = config.pipeline_for(stack, layout.zone_map.clone())?;
        let dir = dir_name(i, &scenario);
        let mut rng = run_rng(scenario_seed, i as u64);

        let mut calibration = Vec::new();
        let mut sessions = Vec::new();
        for ch in &layout.layout.channels {
            let u = sim.uncoated_frame(ch.id, &mut rng)?;
            let d = sim.dark_frame(ch.id, &mut rng)?;
            calibration.push(write_frame(out_dir, format!("{dir}/sensor{}_uncoated.csv", ch.id), &u)?);
            calibration.push(write_frame(out_dir, format!("{dir}/sensor{}_dark.csv", ch.id), &d)?);
            sessions.push(pipeline.session(ch, u, d)?);
        }

        let mut measurements = Vec::new();
        let mut sequence = 0u64;
        let labelled: Vec<(String, _)> = if scenario.trajectory.is_empty() {
            vec![("static".to_string(), scenario.geometry)]
        } else {
            scenario
                .trajectory
                .iter()
                .enumerate()
                .map(|(k, g)| (format!("step{}", k + 1), *g))
                .collect()
        };
        for (label, geometry) in &labelled {
            for _ in 0..scenario.measurements_per_step {
                let mut coated = Vec::new();
                let mut inputs = Vec::new();
                for s in &sessions {
                    let frame = sim.coated_frame(s.sensor_id(), geometry, &mut rng)?;
                    coated.push(write_frame(
                        out_dir,
                        format!("{dir}/seq{sequence:04}_sensor{}_coated.csv", s.sensor_id()),
                        &frame,
                    )?);
                    inputs.push(SensorInput {
                        session: s.clone(),
                        coated: frame,
                    });
                }
                let (measurement, report) = measure_and_fuse(&layout.layout, &inputs, &pipeline, sequence);
                measurements.push(MeasurementRecord {
                    sequence,
                    step: label.clone(),
                    coated,
                    measurement,
                    report,
                });
                sequence += 1;
            }
        }
        records.push(ScenarioRecord {
            name: if scenario.name.is_empty() { dir.clone() } else { scenario.name.clone() },
            true_thickness_nm: scenario.sample.thickness_nm,
            scenario,
            calibration,
            measurements,
        });
    }
    let session = SessionRecord {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            seed_source,
        },
        layout_source,
        layout: LayoutFile::from(&layout.layout),
        config: config.clone(),
        scenarios: records,
    };
    session.save(&out_dir.join(SESSION_FILE))?;
    Ok(session)
}
