use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::array::SENSOR_COUNT;
use crate::error::{Error, Result};
use crate::optics::{FilmStack, MaterialDispersion};

/// Height of the calibration point above the sample, mm.
pub const CALIBRATION_HEIGHT_MM: f64 = 2.0;
pub const MAX_TILT_DEG: f64 = 1.0;
/// Allowed height offsets around the calibration point, mm.
pub const HEIGHT_OFFSET_RANGE_MM: (f64, f64) = (-1.0, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiltAxis {
    #[default]
    None,
    Left,
    Right,
    Front,
    Back,
}

impl TiltAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            TiltAxis::None => "none",
            TiltAxis::Left => "left",
            TiltAxis::Right => "right",
            TiltAxis::Front => "front",
            TiltAxis::Back => "back",
        }
    }
}

impl fmt::Display for TiltAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TiltAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "center" | "centre" => Ok(TiltAxis::None),
            "left" => Ok(TiltAxis::Left),
            "right" => Ok(TiltAxis::Right),
            "front" => Ok(TiltAxis::Front),
            "back" => Ok(TiltAxis::Back),
            other => Err(Error::InvalidScenario(format!("unknown tilt axis `{other}`"))),
        }
    }
}

/// Array pose relative to the calibration point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Geometry {
    pub tilt_axis: TiltAxis,
    pub tilt_deg: f64,
    /// Height relative to the calibration point, mm; negative is closer.
    pub height_offset_mm: f64,
}

impl Geometry {
    pub const CALIBRATION: Geometry = Geometry {
        tilt_axis: TiltAxis::None,
        tilt_deg: 0.0,
        height_offset_mm: 0.0,
    };

    pub fn new(tilt_axis: TiltAxis, tilt_deg: f64, height_offset_mm: f64) -> Self {
        Self {
            tilt_axis,
            tilt_deg,
            height_offset_mm,
        }
    }

    /// Tilt in degrees along its axis; zero when the axis is `none`.
    pub fn effective_tilt_deg(&self) -> f64 {
        if self.tilt_axis == TiltAxis::None {
            0.0
        } else {
            self.tilt_deg
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=MAX_TILT_DEG).contains(&self.tilt_deg) {
            return Err(Error::InvalidScenario(format!(
                "tilt_deg {} outside [0, {MAX_TILT_DEG}]",
                self.tilt_deg
            )));
        }
        let (lo, hi) = HEIGHT_OFFSET_RANGE_MM;
        if !(lo..=hi).contains(&self.height_offset_mm) {
            return Err(Error::InvalidScenario(format!(
                "height_offset_mm {} outside [{lo}, {hi}]",
                self.height_offset_mm
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Per-pixel Gaussian read noise, counts.
    pub counts_sigma: f64,
    /// Per-frame common offset drift, counts.
    pub drift_sigma: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            counts_sigma: 2.0,
            drift_sigma: 0.5,
        }
    }
}

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec {
        counts_sigma: 0.0,
        drift_sigma: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("counts_sigma", self.counts_sigma), ("drift_sigma", self.drift_sigma)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidScenario(format!("noise.{name} = {v} must be non-negative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltSensitivity {
    pub left: [f64; SENSOR_COUNT],
    pub right: [f64; SENSOR_COUNT],
    pub front: [f64; SENSOR_COUNT],
    pub back: [f64; SENSOR_COUNT],
}

impl TiltSensitivity {
    pub fn for_axis(&self, axis: TiltAxis) -> Option<&[f64; SENSOR_COUNT]> {
        match axis {
            TiltAxis::None => None,
            TiltAxis::Left => Some(&self.left),
            TiltAxis::Right => Some(&self.right),
            TiltAxis::Front => Some(&self.front),
            TiltAxis::Back => Some(&self.back),
        }
    }
}

/// Parametric proxy for how misalignment changes the light reaching a sensor:
///
/// ```text
/// coupling = exp(−(tilt·s_sensor)²) · exp(−(Δh·s_h)²)
/// skew(λ)  = σ·tilt·s_sensor·(λ − 575)/125
/// ```
///
/// with `s_h` taken from the below or above sensitivity by the sign of Δh.
/// A sensor with unit sensitivity sees the full `σ·tilt` skew.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    /// Per-sensor sensitivity (index = id − 1) for each tilt direction, 1/deg.
    pub tilt_sensitivity_per_deg: TiltSensitivity,
    pub defocus_below_per_mm: f64,
    pub defocus_above_per_mm: f64,
    pub spectral_skew_per_deg: f64,
}

impl Default for CouplingModel {
    fn default() -> Self {
        serde_json::from_str(include_str!("../../data/coupling.json")).expect("bundled coupling constants parse")
    }
}

impl CouplingModel {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::file(path))?;
        let model: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: Some(e.line() as u64),
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tilt_sensitivity_per_deg;
        let all = t.left.iter().chain(&t.right).chain(&t.front).chain(&t.back).chain([
            &self.defocus_below_per_mm,
            &self.defocus_above_per_mm,
        ]);
        for &v in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScenario(format!("coupling sensitivity {v} must be positive")));
            }
        }
        if !(self.spectral_skew_per_deg.is_finite() && self.spectral_skew_per_deg >= 0.0) {
            return Err(Error::InvalidScenario("spectral skew must be non-negative".into()));
        }
        Ok(())
    }

    fn sensitivity(&self, sensor_id: u8, geometry: &Geometry) -> f64 {
        self.tilt_sensitivity_per_deg
            .for_axis(geometry.tilt_axis)
            .and_then(|v| v.get(usize::from(sensor_id).wrapping_sub(1)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Fraction of the calibration-point signal reaching `sensor_id`.
    pub fn coupling(&self, sensor_id: u8, geometry: &Geometry) -> f64 {
        let tilt = geometry.effective_tilt_deg();
        let s = self.sensitivity(sensor_id, geometry);
        let dh = geometry.height_offset_mm;
        let sh = if dh < 0.0 {
            self.defocus_below_per_mm
        } else {
            self.defocus_above_per_mm
        };
        (-(tilt * s).powi(2)).exp() * (-(dh * sh).powi(2)).exp()
    }

    /// Relative spectral distortion seen by `sensor_id` at `lambda_nm`.
    pub fn skew(&self, sensor_id: u8, lambda_nm: f64, geometry: &Geometry) -> f64 {
        let tilt = geometry.effective_tilt_deg() * self.sensitivity(sensor_id, geometry);
        self.spectral_skew_per_deg * tilt * (lambda_nm - 575.0) / 125.0
    }
}

/// Film stack described by material names (bundled tables) or CSV paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSpec {
    pub name: String,
    pub ambient: String,
    pub film: String,
    pub substrate: String,
    pub thickness_nm: f64,
    pub incidence_deg: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            name: "SAMPLE1".into(),
            ambient: "air".into(),
            film: "sio2".into(),
            substrate: "si".into(),
            thickness_nm: 300.0,
            incidence_deg: 0.0,
        }
    }
}

fn material(name: &str) -> Result<Arc<MaterialDispersion>> {
    match MaterialDispersion::builtin(name) {
        Some(m) => Ok(Arc::new(m)),
        None => Ok(Arc::new(MaterialDispersion::load(Path::new(name))?)),
    }
}

impl SampleSpec {
    pub fn new(name: impl Into<String>, thickness_nm: f64) -> Self {
        Self {
            name: name.into(),
            thickness_nm,
            ..Self::default()
        }
    }

    /// The three samples of the vendor comparison.
    pub fn comparison_set() -> Vec<SampleSpec> {
        vec![
            SampleSpec::new("SAMPLE1", 300.0),
            SampleSpec::new("SAMPLE2", 286.0),
            SampleSpec::new("SAMPLE3", 164.0),
        ]
    }

    pub fn stack(&self) -> Result<FilmStack> {
        FilmStack::new(
            material(&self.ambient)?,
            material(&self.film)?,
            material(&self.substrate)?,
            self.thickness_nm,
            self.incidence_deg,
        )
    }
}

/// A synthetic experiment: one sample seen from a static pose or along a
/// scripted trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub sample: SampleSpec,
    #[serde(default, flatten)]
    pub geometry: Geometry,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Generated and recorded when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Steps replacing the static pose when non-empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<Geometry>,
    #[serde(default = "default_measurements")]
    pub measurements_per_step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingModel>,
}

fn default_measurements() -> usize {
    1
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: String::new(),
            sample: SampleSpec::default(),
            geometry: Geometry::CALIBRATION,
            noise: NoiseSpec::default(),
            seed: None,
            trajectory: Vec::new(),
            measurements_per_step: default_measurements(),
            coupling: None,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        for (i, g) in self.trajectory.iter().enumerate() {
            g.validate()
                .map_err(|e| Error::InvalidScenario(format!("trajectory[{i}]: {e}")))?;
        }
        self.noise.validate()?;
        if !(self.sample.thickness_nm.is_finite() && self.sample.thickness_nm > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "sample.thickness_nm {} must be positive",
                self.sample.thickness_nm
            )));
        }
        if self.measurements_per_step == 0 {
            return Err(Error::InvalidScenario("measurements_per_step must be at least 1".into()));
        }
        if let Some(c) = &self.coupling {
            c.validate()?;
        }
        Ok(())
    }

    /// Poses to simulate: the trajectory, or the static pose alone.
    pub fn steps(&self) -> Vec<Geometry> {
        if self.trajectory.is_empty() {
            vec![self.geometry]
        } else {
            self.trajectory.clone()
        }
    }

    pub fn coupling_model(&self) -> CouplingModel {
        self.coupling.clone().unwrap_or_default()
    }
}
