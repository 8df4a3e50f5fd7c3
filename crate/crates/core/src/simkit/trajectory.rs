use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::scenario::{Geometry, TiltAxis};
use super::synth::{run_rng, Simulator};
use crate::array::{ArrayMeasurement, FusionReport, PipelineConfig, SensorOutcome};
use crate::error::{Error, Result};
use crate::fitcore::{FitParams, FitResult};

pub const MEASUREMENTS_PER_STEP: usize = 50;
/// First step of the circular sequence run with a misaligned end effector.
pub const CIRCULAR_FAULT_STEP: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sequence {
    CalibPoint,
    Circular,
    BackForth,
    TiltSequence,
}

impl Sequence {
    pub const ALL: [Sequence; 4] = [
        Sequence::CalibPoint,
        Sequence::Circular,
        Sequence::BackForth,
        Sequence::TiltSequence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Sequence::CalibPoint => "calib_point",
            Sequence::Circular => "circular",
            Sequence::BackForth => "back_forth",
            Sequence::TiltSequence => "tilt_sequence",
        }
    }

    /// Labelled poses of the sequence.
    pub fn steps(self) -> Vec<TrajectoryStep> {
        let step = |label: String, axis, tilt, dh| TrajectoryStep {
            label,
            geometry: Geometry::new(axis, tilt, dh),
        };
        match self {
            Sequence::CalibPoint => vec![step("Calib".into(), TiltAxis::None, 0.0, 0.0)],
            Sequence::BackForth => [0.0, 0.25, 0.5, 0.25, 0.0, -0.25]
                .iter()
                .enumerate()
                .map(|(i, &dh)| step(format!("Pos{}", i + 1), TiltAxis::None, 0.0, dh))
                .collect(),
            Sequence::Circular => {
                // Small wobble while tracing the circle.
                let wobble = [
                    (TiltAxis::None, 0.0, 0.0),
                    (TiltAxis::Right, 0.1, 0.1),
                    (TiltAxis::Front, 0.1, 0.2),
                    (TiltAxis::Left, 0.1, 0.1),
                    (TiltAxis::Back, 0.1, 0.0),
                    (TiltAxis::None, 0.0, -0.1),
                ];
                (1..=12)
                    .map(|k| {
                        let (axis, tilt, dh) = wobble[(k - 1) % wobble.len()];
                        if k < CIRCULAR_FAULT_STEP {
                            step(format!("Mov{k}"), axis, tilt, dh)
                        } else {
                            // The end effector slips: the array sits 1 mm low, rolled right.
                            step(format!("Mov{k}"), TiltAxis::Right, 0.5, -1.0)
                        }
                    })
                    .collect()
            }
            Sequence::TiltSequence => {
                let mut v = vec![step("Level".into(), TiltAxis::None, 0.0, 0.0)];
                for axis in [TiltAxis::Right, TiltAxis::Left, TiltAxis::Back, TiltAxis::Front] {
                    for a in [0.166, 0.33, 0.5] {
                        v.push(step(format!("{axis}{a}"), axis, a, 0.0));
                    }
                }
                v
            }
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sequence::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::UnknownSequence(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub label: String,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub label: String,
    pub geometry: Geometry,
    /// Per-sensor fits averaged over the step's measurements.
    pub averaged: ArrayMeasurement,
    pub report: FusionReport,
    pub fused_std_nm: f64,
    pub fused_error_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub sequence: Sequence,
    pub true_thickness_nm: f64,
    pub measurements_per_step: usize,
    pub steps: Vec<StepReport>,
}

/// Mean of each sensor's fits across `runs`; the gate is re-evaluated on the
/// averaged metrics.
pub fn average_measurements(runs: &[ArrayMeasurement], config: &PipelineConfig, sequence: u64) -> ArrayMeasurement {
    let Some(first) = runs.first() else {
        return ArrayMeasurement {
            sequence,
            sensors: Vec::new(),
        };
    };
    let sensors = first
        .sensors
        .iter()
        .map(|s0| {
            let fits: Vec<&FitResult> = runs
                .iter()
                .filter_map(|m| m.sensors.iter().find(|s| s.sensor_id == s0.sensor_id))
                .filter_map(|s| s.fit.as_ref())
                .collect();
            if fits.is_empty() {
                return SensorOutcome::failed(s0.sensor_id, "no successful fit in this step");
            }
            let n = fits.len() as f64;
            let avg = |f: &dyn Fn(&FitResult) -> f64| fits.iter().map(|r| f(r)).sum::<f64>() / n;
            let params = FitParams {
                thickness_nm: avg(&|r| r.params.thickness_nm),
                index_scale: avg(&|r| r.params.index_scale),
                theta0_deg: avg(&|r| r.params.theta0_deg),
            };
            let rmse = avg(&|r| r.rmse);
            let r_squared = avg(&|r| r.r_squared);
            let last = fits[fits.len() - 1];
            SensorOutcome::fitted(
                s0.sensor_id,
                FitResult {
                    params,
                    rmse,
                    r_squared,
                    residual_norm: avg(&|r| r.residual_norm),
                    gate: config.fit.gate.evaluate(rmse, r_squared),
                    converged: fits.iter().all(|r| r.converged),
                    ..last.clone()
                },
            )
        })
        .collect();
    ArrayMeasurement { sequence, sensors }
}

/// Calibrates once, then takes `measurements_per_step` readings at each pose.
pub fn run_trajectory(
    sim: &Simulator,
    sequence: Sequence,
    config: &PipelineConfig,
    seed: u64,
    measurements_per_step: usize,
) -> Result<TrajectoryReport> {
    run_steps(sim, sequence, &sequence.steps(), config, seed, measurements_per_step)
}

pub fn run_steps(
    sim: &Simulator,
    sequence: Sequence,
    steps: &[TrajectoryStep],
    config: &PipelineConfig,
    seed: u64,
    measurements_per_step: usize,
) -> Result<TrajectoryReport> {
    if measurements_per_step == 0 {
        return Err(Error::InvalidScenario("measurements_per_step must be at least 1".into()));
    }
    let mut rng = run_rng(seed, 0);
    let sessions = sim.calibrate(config, &mut rng)?;
    let truth = sim.true_thickness_nm();
    let mut out = Vec::with_capacity(steps.len());
    let mut seq = 0u64;
    for (k, step) in steps.iter().enumerate() {
        step.geometry.validate()?;
        let mut runs = Vec::with_capacity(measurements_per_step);
        let mut fused = Vec::with_capacity(measurements_per_step);
        for _ in 0..measurements_per_step {
            let (m, r) = sim.measure(&sessions, &step.geometry, config, seq, &mut rng)?;
            seq += 1;
            fused.extend(r.fused_thickness_nm);
            runs.push(m);
        }
        let averaged = average_measurements(&runs, config, k as u64);
        let report = FusionReport::build(&averaged, config.fusion, &config.zone_map);
        let std = if fused.len() > 1 {
            let m = fused.iter().sum::<f64>() / fused.len() as f64;
            (fused.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (fused.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        out.push(StepReport {
            label: step.label.clone(),
            geometry: step.geometry,
            fused_error_pct: report.fused_thickness_nm.map(|d| (d - truth) / truth * 100.0),
            averaged,
            report,
            fused_std_nm: std,
        });
    }
    Ok(TrajectoryReport {
        sequence,
        true_thickness_nm: truth,
        measurements_per_step,
        steps: out,
    })
}
