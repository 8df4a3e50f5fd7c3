use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::files::{load_json, resolve};
use crate::array::{
    ArrayLayout, FusionMode, PipelineConfig, ReferenceMode, SensorChannel, Zone, ZoneMap, DEFAULT_FIT_BAND_NM,
    DEFAULT_SPAN_MM,
};
use crate::error::{Error, Result};
use crate::fitcore::{Bounds, FitOptions, FitParams};
use crate::optics::{FilmStack, MaterialDispersion};
use crate::simkit::{CouplingModel, DoeGrid, Exposure, NoiseSpec, SampleSpec, DEFAULT_RUNS_PER_CELL, MEASUREMENTS_PER_STEP};
use crate::spectra::{PixelCalibration, MAX_WINDOW};

/// Ambient, film and substrate: bundled table names or CSV paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialsConfig {
    pub ambient: String,
    pub film: String,
    pub substrate: String,
}

impl Default for MaterialsConfig {
    fn default() -> Self {
        Self {
            ambient: "air".into(),
            film: "sio2".into(),
            substrate: "si".into(),
        }
    }
}

fn material(name: &str) -> Result<Arc<MaterialDispersion>> {
    match MaterialDispersion::builtin(name) {
        Some(m) => Ok(Arc::new(m)),
        None => Ok(Arc::new(MaterialDispersion::load(Path::new(name))?)),
    }
}

impl MaterialsConfig {
    pub fn stack(&self, thickness_nm: f64) -> Result<FilmStack> {
        FilmStack::new(
            material(&self.ambient)?,
            material(&self.film)?,
            material(&self.substrate)?,
            thickness_nm,
            0.0,
        )
    }
}

/// Fit parameter limits and the free-parameter mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub thickness_nm: (f64, f64),
    pub free_index_scale: bool,
    pub free_theta: bool,
    /// Nominal index scale; the free range is ±2 % around it.
    pub index_scale: f64,
    /// Nominal incidence angle, degrees; the free range is ±1° around it.
    pub theta0_deg: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            thickness_nm: (50.0, 1000.0),
            free_index_scale: false,
            free_theta: false,
            index_scale: 1.0,
            theta0_deg: 0.0,
        }
    }
}

impl BoundsConfig {
    pub fn bounds(&self) -> Result<Bounds> {
        let mut b = Bounds::thickness_only(self.thickness_nm.0, self.thickness_nm.1);
        if self.free_index_scale {
            b = b.with_free_index_scale(self.index_scale);
        }
        if self.free_theta {
            b = b.with_free_theta(self.theta0_deg);
        }
        b.validate()?;
        Ok(b)
    }

    pub fn base(&self) -> FitParams {
        FitParams {
            thickness_nm: self.thickness_nm.0,
            index_scale: self.index_scale,
            theta0_deg: self.theta0_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatorConfig {
    pub noise: NoiseSpec,
    pub exposure: Exposure,
    /// Inline coupling constants; the bundled ones when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingModel>,
    /// Coupling constants file, used when `coupling` is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_file: Option<String>,
    pub runs_per_cell: usize,
    pub measurements_per_step: usize,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        Self {
            noise: NoiseSpec::default(),
            exposure: Exposure::default(),
            coupling: None,
            coupling_file: None,
            runs_per_cell: DEFAULT_RUNS_PER_CELL,
            measurements_per_step: MEASUREMENTS_PER_STEP,
        }
    }
}

impl SimulatorConfig {
    pub fn coupling_model(&self) -> Result<CouplingModel> {
        match (&self.coupling, &self.coupling_file) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(path)) => CouplingModel::load(Path::new(path)),
            (None, None) => Ok(CouplingModel::default()),
        }
    }
}

/// Everything tunable about a run, loaded from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub fit: FitOptions,
    pub bounds: BoundsConfig,
    /// Multistart seed count; derived from the seed spacing when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_starts: Option<usize>,
    pub smoothing_window: usize,
    pub fusion: FusionMode,
    pub reference: ReferenceMode,
    pub fit_band_nm: (f64, f64),
    pub materials: MaterialsConfig,
    pub simulator: SimulatorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            bounds: BoundsConfig::default(),
            n_starts: None,
            smoothing_window: crate::spectra::DEFAULT_WINDOW,
            fusion: FusionMode::default(),
            reference: ReferenceMode::default(),
            fit_band_nm: DEFAULT_FIT_BAND_NM,
            materials: MaterialsConfig::default(),
            simulator: SimulatorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let c: Self = load_json(path)?;
        c.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: None,
            message: e.to_string(),
        })?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.fit.gate.validate()?;
        self.bounds.bounds()?;
        let w = self.smoothing_window;
        if w == 0 || w.is_multiple_of(2) || w > MAX_WINDOW {
            return Err(Error::InvalidWindow(w));
        }
        let (lo, hi) = self.fit_band_nm;
        if !(lo < hi) {
            return Err(Error::Config(format!("fit band [{lo}, {hi}] nm is empty")));
        }
        if self.n_starts == Some(0) {
            return Err(Error::Config("n_starts must be at least 1".into()));
        }
        if !(self.fit.multistart_spacing_nm > 0.0) {
            return Err(Error::Config("multistart_spacing_nm must be positive".into()));
        }
        if let ReferenceMode::Constant(r) = self.reference {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Config(format!("reference reflectance {r} outside (0, 1]")));
            }
        }
        self.simulator.noise.validate()?;
        if let Some(c) = &self.simulator.coupling {
            c.validate()?;
        }
        if self.simulator.runs_per_cell == 0 || self.simulator.measurements_per_step == 0 {
            return Err(Error::Config("simulator run counts must be at least 1".into()));
        }
        Ok(())
    }

    /// Pipeline settings around a template built from `materials`.
    pub fn pipeline(&self, zone_map: ZoneMap) -> Result<PipelineConfig> {
        self.pipeline_for(self.materials.stack(self.bounds.thickness_nm.0)?, zone_map)
    }

    pub fn pipeline_for(&self, template: FilmStack, zone_map: ZoneMap) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            template,
            fit: self.fit,
            bounds: self.bounds.bounds()?,
            base: self.bounds.base(),
            smoothing_window: self.smoothing_window,
            fusion: self.fusion,
            reference: self.reference,
            fit_band_nm: self.fit_band_nm,
            zone_map,
            n_starts: self.n_starts,
        })
    }
}

/// Pixel calibration given inline or as a path relative to the layout file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CalibrationRef {
    Inline(PixelCalibration),
    File(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub id: u8,
    pub zone: Zone,
    #[serde(default)]
    pub offset_x_mm: f64,
    #[serde(default)]
    pub offset_y_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationRef>,
}

/// On-disk layout: channels plus an optional zone map override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub channels: Vec<ChannelEntry>,
    #[serde(default = "default_span")]
    pub span_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone_map: Option<ZoneMap>,
}

fn default_span() -> f64 {
    DEFAULT_SPAN_MM
}

impl From<&ArrayLayout> for LayoutFile {
    fn from(layout: &ArrayLayout) -> Self {
        Self {
            channels: layout
                .channels
                .iter()
                .map(|c| ChannelEntry {
                    id: c.id,
                    zone: c.zone,
                    offset_x_mm: c.offset_x_mm,
                    offset_y_mm: c.offset_y_mm,
                    calibration: Some(CalibrationRef::Inline(c.calibration)),
                })
                .collect(),
            span_mm: layout.span_mm,
            zone_map: None,
        }
    }
}

/// A resolved layout and the zone map to classify with.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedLayout {
    pub layout: ArrayLayout,
    pub zone_map: ZoneMap,
}

impl LoadedLayout {
    pub fn default_layout() -> Self {
        let layout = ArrayLayout::default();
        Self {
            zone_map: ZoneMap::from_layout(&layout),
            layout,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: LayoutFile = load_json(path)?;
        Self::from_file(file, path)
    }

    pub fn from_file(file: LayoutFile, path: &Path) -> Result<Self> {
        let channels = file
            .channels
            .into_iter()
            .map(|c| {
                let calibration = match c.calibration {
                    None => PixelCalibration::default(),
                    Some(CalibrationRef::Inline(cal)) => {
                        cal.wavelength_grid()?;
                        cal
                    }
                    Some(CalibrationRef::File(f)) => PixelCalibration::load(&resolve(path, &f))?,
                };
                Ok(SensorChannel {
                    id: c.id,
                    zone: c.zone,
                    offset_x_mm: c.offset_x_mm,
                    offset_y_mm: c.offset_y_mm,
                    calibration,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let layout = ArrayLayout {
            channels,
            span_mm: file.span_mm,
        };
        layout.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: None,
            message: e.to_string(),
        })?;
        let zone_map = file.zone_map.unwrap_or_else(|| ZoneMap::from_layout(&layout));
        for c in &layout.channels {
            if !zone_map.zones.contains_key(&c.id) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: None,
                    message: format!("zone map has no entry for sensor {}", c.id),
                });
            }
        }
        Ok(Self { layout, zone_map })
    }
}

/// `sweep` input: the DOE grid and the sample it runs on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub grid: DoeGrid,
    pub sample: SampleSpec,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::files::{parse_json, to_json};

    #[test]
    fn defaults_match_gate_and_window() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.fit.gate.rmse_max, 0.04);
        assert_eq!(c.fit.gate.r2_min, 0.7);
        assert_eq!(c.smoothing_window, 5);
        let p = c.pipeline(ZoneMap::default()).unwrap();
        assert_eq!(p.start_count(), 38);
    }

    #[test]
    fn partial_config_and_round_trip() {
        let c: RunConfig = parse_json(
            r#"{"fit": {"gate": {"rmse_max": 0.022, "r2_min": 0.9}}, "bounds": {"free_theta": true}, "fusion": "gated"}"#,
            Path::new("c.json"),
        )
        .unwrap();
        assert_eq!(c.fit.gate.rmse_max, 0.022);
        assert_eq!(c.fit.multistart_spacing_nm, 25.0);
        assert!(c.bounds.bounds().unwrap().free[2]);
        let back: RunConfig = parse_json(&to_json(&c).unwrap(), Path::new("c.json")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_config_values() {
        let mut c = RunConfig::default();
        c.smoothing_window = 4;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.fit.gate.rmse_max = -1.0;
        assert!(c.validate().is_err());
        let err = parse_json::<RunConfig>(r#"{"smoothing_windw": 3}"#, Path::new("c.json")).unwrap_err();
        assert!(err.to_string().contains("smoothing_windw"));
    }

    #[test]
    fn layout_file_round_trip() {
        let d = LoadedLayout::default_layout();
        let file = LayoutFile::from(&d.layout);
        let text = to_json(&file).unwrap();
        let back = LoadedLayout::from_file(parse_json(&text, Path::new("l.json")).unwrap(), Path::new("l.json")).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn layout_with_calibration_file() {
        let dir = tempfile::tempdir().unwrap();
        let cal = PixelCalibration::new(350.0, [1.7, 0.0, 0.0, 0.0, 0.0]).unwrap();
        std::fs::write(dir.path().join("cal.json"), serde_json::to_string(&cal).unwrap()).unwrap();
        let text = r#"{"channels": [{"id": 1, "zone": "A1", "calibration": "cal.json"}, {"id": 2, "zone": "A1"}]}"#;
        std::fs::write(dir.path().join("layout.json"), text).unwrap();
        let l = LoadedLayout::load(&dir.path().join("layout.json")).unwrap();
        assert_eq!(l.layout.channels[0].calibration, cal);
        assert_eq!(l.layout.channels[1].calibration, PixelCalibration::default());
    }
}
