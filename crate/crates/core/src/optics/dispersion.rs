//! Tabulated optical constants.
//!
//! Tables are plain CSV (`wavelength_nm,n,k`, ascending rows) and are
//! interpolated linearly in wavelength. The crate ships tables for air, fused
//! silica (Malitson Sellmeier, sampled every 5 nm) and crystalline silicon
//! (Green 2008, 10 nm steps) under `data/`.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wavelength window every table must cover so that the 450–700 nm sensor
/// band is strictly interior.
pub const REQUIRED_SPAN_NM: (f64, f64) = (440.0, 710.0);

const AIR_CSV: &str = include_str!("../../data/air.csv");
const SIO2_CSV: &str = include_str!("../../data/sio2.csv");
const SI_CSV: &str = include_str!("../../data/si.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    #[serde(rename = "wavelength_nm")]
    pub wavelength_nm: f64,
    pub n: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDispersion {
    name: String,
    samples: Vec<DispersionSample>,
}

impl MaterialDispersion {
    pub fn new(name: impl Into<String>, samples: Vec<DispersionSample>) -> Result<Self> {
        let name = name.into();
        if samples.len() < 2 {
            return Err(Error::InvalidDispersion(format!(
                "{name}: need at least two samples"
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.wavelength_nm.is_finite() && s.n.is_finite() && s.k.is_finite()) {
                return Err(Error::InvalidDispersion(format!("{name}: row {i} not finite")));
            }
            if s.n <= 0.0 {
                return Err(Error::InvalidDispersion(format!("{name}: row {i} has n <= 0")));
            }
            if s.k < 0.0 {
                return Err(Error::InvalidDispersion(format!("{name}: row {i} has k < 0")));
            }
        }
        if let Some(i) = samples
            .windows(2)
            .position(|w| w[1].wavelength_nm <= w[0].wavelength_nm)
        {
            return Err(Error::InvalidDispersion(format!(
                "{name}: wavelengths not strictly increasing at row {}",
                i + 1
            )));
        }
        let (lo, hi) = (samples[0].wavelength_nm, samples[samples.len() - 1].wavelength_nm);
        if lo > REQUIRED_SPAN_NM.0 || hi < REQUIRED_SPAN_NM.1 {
            return Err(Error::InvalidDispersion(format!(
                "{name}: span [{lo}, {hi}] nm does not cover [{}, {}] nm",
                REQUIRED_SPAN_NM.0, REQUIRED_SPAN_NM.1
            )));
        }
        Ok(Self { name, samples })
    }

    /// Wavelength-independent medium over the given span.
    pub fn constant(name: impl Into<String>, n: f64, k: f64, span_nm: (f64, f64)) -> Result<Self> {
        Self::new(
            name,
            vec![
                DispersionSample { wavelength_nm: span_nm.0, n, k },
                DispersionSample { wavelength_nm: span_nm.1, n, k },
            ],
        )
    }

    pub fn air() -> Self {
        Self::from_csv_str("air", AIR_CSV).expect("bundled air table is valid")
    }

    pub fn sio2() -> Self {
        Self::from_csv_str("SiO2", SIO2_CSV).expect("bundled SiO2 table is valid")
    }

    pub fn si() -> Self {
        Self::from_csv_str("Si", SI_CSV).expect("bundled Si table is valid")
    }

    /// Resolves `air`, `sio2` and `si` (case-insensitive) to the bundled tables.
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "air" => Some(Self::air()),
            "sio2" => Some(Self::sio2()),
            "si" => Some(Self::si()),
            _ => None,
        }
    }

    pub fn from_csv_str(name: impl Into<String>, text: &str) -> Result<Self> {
        let name = name.into();
        let samples = parse_csv(text.as_bytes(), Path::new(&name))?;
        Self::new(name, samples)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(Error::file(path))?;
        let samples = parse_csv(file, path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Self::new(name, samples)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("wavelength_nm,n,k\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", s.wavelength_nm, s.n, s.k));
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[DispersionSample] {
        &self.samples
    }

    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].wavelength_nm, self.samples[self.samples.len() - 1].wavelength_nm)
    }

    /// Complex index `N = n − i·k` at `lambda_nm`, linearly interpolated.
    pub fn refractive_index(&self, lambda_nm: f64) -> Result<Complex64> {
        let (min, max) = self.span();
        if !(lambda_nm >= min && lambda_nm <= max) {
            return Err(Error::WavelengthOutOfRange {
                material: self.name.clone(),
                lambda: lambda_nm,
                min,
                max,
            });
        }
        // First node strictly above lambda; the last interval is closed on the right.
        let upper = self
            .samples
            .partition_point(|s| s.wavelength_nm <= lambda_nm)
            .clamp(1, self.samples.len() - 1);
        let a = &self.samples[upper - 1];
        let b = &self.samples[upper];
        if lambda_nm == a.wavelength_nm {
            return Ok(Complex64::new(a.n, -a.k));
        }
        let t = (lambda_nm - a.wavelength_nm) / (b.wavelength_nm - a.wavelength_nm);
        let n = a.n + t * (b.n - a.n);
        let k = a.k + t * (b.k - a.k);
        Ok(Complex64::new(n, -k))
    }
}

fn parse_csv<R: Read>(reader: R, source: &Path) -> Result<Vec<DispersionSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(source, e))?.clone();
    let expected = ["wavelength_nm", "n", "k"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            path: source.to_path_buf(),
            line: Some(1),
            message: format!("expected header `wavelength_nm,n,k`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    rdr.deserialize()
        .map(|row| row.map_err(|e| csv_error(source, e)))
        .collect()
}

pub(crate) fn csv_error(source: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line());
    let message = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => err.to_string(),
    };
    Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    }
}
