use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::led::led_spectrum;
use super::scenario::{CouplingModel, Geometry, NoiseSpec};
use crate::array::{measure_and_fuse, ArrayLayout, ArrayMeasurement, FusionReport, PipelineConfig, SensorInput};
use crate::error::{Error, Result};
use crate::optics::{FilmStack, ModelGrid, PolarizationMode};
use crate::spectra::{CalibrationSession, FrameKind, SpectrumFrame, ADC_MAX};

/// Exposure settings shared by every channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Exposure {
    pub dark_level_counts: f64,
    /// Peak of the uncoated signal as a fraction of full scale.
    pub fill_fraction: f64,
    pub integration_time_us: f64,
}

impl Default for Exposure {
    fn default() -> Self {
        Self {
            dark_level_counts: 8.0,
            fill_fraction: 0.9,
            integration_time_us: 1000.0,
        }
    }
}

/// RNG for run `run` of a seeded experiment; runs use disjoint streams.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

#[derive(Debug, Clone)]
struct ChannelPlan {
    id: u8,
    wavelengths: Vec<f64>,
    /// Noise-free uncoated signal above dark, counts.
    uncoated: Vec<f64>,
    /// Noise-free coated signal above dark at the calibration pose, counts.
    coated: Vec<f64>,
}

/// Uncoated, dark and coated frames of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFrames {
    pub uncoated: SpectrumFrame,
    pub dark: SpectrumFrame,
    pub coated: SpectrumFrame,
}

/// Frame generator for one sample under an array layout.
#[derive(Debug, Clone)]
pub struct Simulator {
    layout: ArrayLayout,
    stack: FilmStack,
    coupling: CouplingModel,
    noise: NoiseSpec,
    exposure: Exposure,
    plans: Vec<ChannelPlan>,
}

impl Simulator {
    pub fn new(
        layout: ArrayLayout,
        stack: FilmStack,
        coupling: CouplingModel,
        noise: NoiseSpec,
        exposure: Exposure,
    ) -> Result<Self> {
        layout.validate()?;
        coupling.validate()?;
        noise.validate()?;
        let full_scale = f64::from(ADC_MAX) * exposure.fill_fraction;
        let mode = PolarizationMode::Unpolarized;
        let mut plans = Vec::with_capacity(layout.channels.len());
        for ch in &layout.channels {
            let wavelengths = ch.calibration.wavelength_grid()?;
            let led: Vec<f64> = wavelengths.iter().map(|&l| led_spectrum(l)).collect();
            let substrate = wavelengths
                .iter()
                .map(|&l| stack.bare_substrate_reflectance(l, mode))
                .collect::<Result<Vec<_>>>()?;
            let film = ModelGrid::new(&stack, &wavelengths, mode)?.reflectance(stack.thickness_nm());
            let peak = led.iter().zip(&substrate).map(|(a, b)| a * b).fold(0.0, f64::max);
            if !(peak > 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "sensor {} sees no LED light on its wavelength grid",
                    ch.id
                )));
            }
            let gain = full_scale / peak;
            plans.push(ChannelPlan {
                id: ch.id,
                uncoated: led.iter().zip(&substrate).map(|(a, r)| gain * a * r).collect(),
                coated: led.iter().zip(&film).map(|(a, r)| gain * a * r).collect(),
                wavelengths,
            });
        }
        Ok(Self {
            layout,
            stack,
            coupling,
            noise,
            exposure,
            plans,
        })
    }

    /// Default layout, coupling and exposure.
    pub fn with_defaults(stack: FilmStack, noise: NoiseSpec) -> Result<Self> {
        Self::new(ArrayLayout::default(), stack, CouplingModel::default(), noise, Exposure::default())
    }

    pub fn layout(&self) -> &ArrayLayout {
        &self.layout
    }

    pub fn stack(&self) -> &FilmStack {
        &self.stack
    }

    pub fn true_thickness_nm(&self) -> f64 {
        self.stack.thickness_nm()
    }

    pub fn coupling(&self) -> &CouplingModel {
        &self.coupling
    }

    fn plan(&self, sensor_id: u8) -> Result<&ChannelPlan> {
        self.plans
            .iter()
            .find(|p| p.id == sensor_id)
            .ok_or_else(|| Error::InvalidScenario(format!("sensor {sensor_id} not in layout")))
    }

    fn frame<R: Rng>(&self, id: u8, signal: impl Iterator<Item = f64>, kind: FrameKind, rng: &mut R) -> Result<SpectrumFrame> {
        let drift = self.noise.drift_sigma * rng.sample::<f64, _>(StandardNormal);
        let counts = signal
            .map(|s| {
                let noise = self.noise.counts_sigma * rng.sample::<f64, _>(StandardNormal);
                (s + self.exposure.dark_level_counts + drift + noise)
                    .round()
                    .clamp(0.0, f64::from(ADC_MAX)) as u16
            })
            .collect();
        SpectrumFrame::new(id, counts, self.exposure.integration_time_us, kind)
    }

    pub fn dark_frame<R: Rng>(&self, sensor_id: u8, rng: &mut R) -> Result<SpectrumFrame> {
        let n = self.plan(sensor_id)?.wavelengths.len();
        self.frame(sensor_id, std::iter::repeat_n(0.0, n), FrameKind::Dark, rng)
    }

    /// Uncoated reference, always captured at the calibration pose.
    pub fn uncoated_frame<R: Rng>(&self, sensor_id: u8, rng: &mut R) -> Result<SpectrumFrame> {
        let plan = self.plan(sensor_id)?;
        self.frame(sensor_id, plan.uncoated.iter().copied(), FrameKind::Uncoated, rng)
    }

    pub fn coated_frame<R: Rng>(&self, sensor_id: u8, geometry: &Geometry, rng: &mut R) -> Result<SpectrumFrame> {
        let plan = self.plan(sensor_id)?;
        let c = self.coupling.coupling(sensor_id, geometry);
        let signal = plan
            .coated
            .iter()
            .zip(&plan.wavelengths)
            .map(|(s, &l)| s * c * (1.0 + self.coupling.skew(sensor_id, l, geometry)));
        self.frame(sensor_id, signal, FrameKind::Coated, rng)
    }

    /// Uncoated and dark at calibration, coated at `geometry`.
    pub fn synth_frames<R: Rng>(&self, sensor_id: u8, geometry: &Geometry, rng: &mut R) -> Result<SynthFrames> {
        Ok(SynthFrames {
            uncoated: self.uncoated_frame(sensor_id, rng)?,
            dark: self.dark_frame(sensor_id, rng)?,
            coated: self.coated_frame(sensor_id, geometry, rng)?,
        })
    }

    /// Captures a calibration session on every channel.
    pub fn calibrate<R: Rng>(&self, config: &PipelineConfig, rng: &mut R) -> Result<Vec<CalibrationSession>> {
        self.layout
            .channels
            .iter()
            .map(|ch| {
                let uncoated = self.uncoated_frame(ch.id, rng)?;
                let dark = self.dark_frame(ch.id, rng)?;
                config.session(ch, uncoated, dark)
            })
            .collect()
    }

    /// One array reading at `geometry` against existing sessions.
    pub fn measure<R: Rng>(
        &self,
        sessions: &[CalibrationSession],
        geometry: &Geometry,
        config: &PipelineConfig,
        sequence: u64,
        rng: &mut R,
    ) -> Result<(ArrayMeasurement, FusionReport)> {
        let inputs = sessions
            .iter()
            .map(|s| {
                Ok(SensorInput {
                    coated: self.coated_frame(s.sensor_id(), geometry, rng)?,
                    session: s.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(measure_and_fuse(&self.layout, &inputs, config, sequence))
    }

    /// Fresh calibration followed by one reading, as one run of a static cell.
    pub fn run_array<R: Rng>(
        &self,
        geometry: &Geometry,
        config: &PipelineConfig,
        sequence: u64,
        rng: &mut R,
    ) -> Result<(ArrayMeasurement, FusionReport)> {
        let sessions = self.calibrate(config, rng)?;
        self.measure(&sessions, geometry, config, sequence, rng)
    }
}
