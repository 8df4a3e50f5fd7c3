use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fusion::{ArrayMeasurement, FusionMode, FusionReport, SensorOutcome};
use super::layout::{ArrayLayout, SensorChannel, ZoneMap};
use crate::error::{Error, Result};
use crate::fitcore::{default_start_count, multistart_fit, Bounds, FitOptions, FitParams, FitResult};
use crate::optics::{FilmStack, ReflectanceCurve};
use crate::spectra::{
    measure_reflectance, CalibrationSession, ReferenceReflectance, Smooth, SpectrumFrame, DEFAULT_WINDOW,
};

/// Source of the absolute reflectance assigned to the uncoated reference.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Modelled reflectance of the bare substrate at each pixel.
    #[default]
    SubstrateModel,
    Constant(f64),
}

/// Band the LED actually illuminates, nm.
pub const DEFAULT_FIT_BAND_NM: (f64, f64) = (450.0, 700.0);

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub template: FilmStack,
    pub fit: FitOptions,
    pub bounds: Bounds,
    /// Starting values for parameters other than thickness.
    pub base: FitParams,
    /// Boxcar window applied to the measured reflectance; 1 disables it.
    pub smoothing_window: usize,
    pub fusion: FusionMode,
    pub reference: ReferenceMode,
    pub fit_band_nm: (f64, f64),
    pub zone_map: ZoneMap,
    /// Multistart seed count; `None` derives it from the seed spacing.
    pub n_starts: Option<usize>,
}

impl PipelineConfig {
    pub fn new(template: FilmStack) -> Self {
        Self {
            template,
            fit: FitOptions::default(),
            bounds: Bounds::default(),
            base: FitParams::new(0.0),
            smoothing_window: DEFAULT_WINDOW,
            fusion: FusionMode::default(),
            reference: ReferenceMode::default(),
            fit_band_nm: DEFAULT_FIT_BAND_NM,
            zone_map: ZoneMap::default(),
            n_starts: None,
        }
    }

    pub fn sio2_on_si() -> Result<Self> {
        Ok(Self::new(FilmStack::sio2_on_si(100.0)?))
    }

    pub fn start_count(&self) -> usize {
        self.n_starts
            .unwrap_or_else(|| default_start_count(&self.bounds, self.fit.multistart_spacing_nm))
    }

    pub fn reference_for(&self, channel: &SensorChannel) -> Result<ReferenceReflectance> {
        match self.reference {
            ReferenceMode::Constant(r) => Ok(ReferenceReflectance::Constant(r)),
            ReferenceMode::SubstrateModel => {
                let mode = self.fit.polarization;
                let curve = channel
                    .calibration
                    .wavelength_grid()?
                    .iter()
                    .map(|&l| self.template.bare_substrate_reflectance(l, mode))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ReferenceReflectance::Curve(curve))
            }
        }
    }

    /// Builds a calibration session whose reference follows [`Self::reference`].
    pub fn session(
        &self,
        channel: &SensorChannel,
        uncoated: SpectrumFrame,
        dark: SpectrumFrame,
    ) -> Result<CalibrationSession> {
        CalibrationSession::new(uncoated, dark, self.reference_for(channel)?)
    }
}

#[derive(Debug, Clone)]
pub struct SensorInput {
    pub session: CalibrationSession,
    pub coated: SpectrumFrame,
}

/// Reflectance of one coated frame, smoothed and cut to the fit band.
pub fn sensor_reflectance(
    channel: &SensorChannel,
    input: &SensorInput,
    config: &PipelineConfig,
) -> Result<ReflectanceCurve> {
    let wavelengths = channel.calibration.wavelength_grid()?;
    let mut curve = measure_reflectance(&input.coated, &input.session, &wavelengths)?;
    if config.smoothing_window > 1 {
        curve = curve.smooth(config.smoothing_window)?;
    }
    let (lo, hi) = config.fit_band_nm;
    Ok(curve.restricted_to(lo, hi))
}

pub fn fit_sensor(channel: &SensorChannel, input: &SensorInput, config: &PipelineConfig) -> Result<FitResult> {
    if input.coated.sensor_id() != channel.id || input.session.sensor_id() != channel.id {
        return Err(Error::MismatchedFrames(format!(
            "channel {} got frames from sensor {}",
            channel.id,
            input.coated.sensor_id()
        )));
    }
    let curve = sensor_reflectance(channel, input, config)?;
    multistart_fit(&curve, &config.template, config.base, config.bounds, config.start_count(), &config.fit)
}

/// Fits every channel of the layout. A channel whose input is missing or whose
/// fit fails is recorded as failed; it never aborts the others.
pub fn measure_array(
    layout: &ArrayLayout,
    inputs: &[SensorInput],
    config: &PipelineConfig,
    sequence: u64,
) -> ArrayMeasurement {
    let sensors = layout
        .channels
        .par_iter()
        .map(|channel| match inputs.iter().find(|i| i.coated.sensor_id() == channel.id) {
            None => SensorOutcome::failed(channel.id, "no frames for this sensor"),
            Some(input) => match fit_sensor(channel, input, config) {
                Ok(fit) => SensorOutcome::fitted(channel.id, fit),
                Err(e) => SensorOutcome::failed(channel.id, e),
            },
        })
        .collect();
    ArrayMeasurement { sequence, sensors }
}

/// [`measure_array`] followed by fusion and tilt classification.
pub fn measure_and_fuse(
    layout: &ArrayLayout,
    inputs: &[SensorInput],
    config: &PipelineConfig,
    sequence: u64,
) -> (ArrayMeasurement, FusionReport) {
    let m = measure_array(layout, inputs, config, sequence);
    let report = FusionReport::build(&m, config.fusion, &config.zone_map);
    (m, report)
}
