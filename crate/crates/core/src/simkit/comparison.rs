use serde::{Deserialize, Serialize};

use super::scenario::{Geometry, SampleSpec};
use super::synth::{run_rng, Exposure, Simulator};
use super::CouplingModel;
use super::NoiseSpec;
use crate::array::{ArrayLayout, PipelineConfig};
use crate::error::Result;

/// Accuracy of the array at the calibration point on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub sample: String,
    pub true_thickness_nm: f64,
    pub fused_mean_nm: f64,
    pub fused_std_nm: f64,
    /// Signed error of the mean, percent.
    pub error_pct: f64,
    /// Fraction of runs whose fused value lies within ±2 % of truth.
    pub within_2pct: f64,
    pub fused_runs_nm: Vec<f64>,
}

pub struct ComparisonSetup<'a> {
    pub layout: &'a ArrayLayout,
    pub coupling: &'a CouplingModel,
    pub noise: NoiseSpec,
    pub exposure: Exposure,
    pub runs: usize,
    pub seed: u64,
}

/// Repeated calibration-point readings of each sample; the fitting template
/// reuses the sample's materials.
pub fn run_comparison(
    samples: &[SampleSpec],
    setup: &ComparisonSetup<'_>,
    configure: impl Fn(&SampleSpec) -> Result<PipelineConfig>,
) -> Result<Vec<ComparisonRow>> {
    samples
        .iter()
        .map(|sample| {
            let stack = sample.stack()?;
            let sim = Simulator::new(setup.layout.clone(), stack, setup.coupling.clone(), setup.noise, setup.exposure)?;
            let config = configure(sample)?;
            let truth = sample.thickness_nm;
            let mut fused = Vec::with_capacity(setup.runs);
            for r in 0..setup.runs {
                let (_, rep) = sim.run_array(&Geometry::CALIBRATION, &config, r as u64, &mut run_rng(setup.seed, r as u64))?;
                fused.extend(rep.fused_thickness_nm);
            }
            let n = fused.len().max(1) as f64;
            let mean = fused.iter().sum::<f64>() / n;
            let std = (fused.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
            Ok(ComparisonRow {
                sample: sample.name.clone(),
                true_thickness_nm: truth,
                fused_mean_nm: mean,
                fused_std_nm: std,
                error_pct: (mean - truth) / truth * 100.0,
                within_2pct: fused.iter().filter(|v| ((*v - truth) / truth).abs() <= 0.02).count() as f64
                    / setup.runs.max(1) as f64,
                fused_runs_nm: fused,
            })
        })
        .collect()
}
