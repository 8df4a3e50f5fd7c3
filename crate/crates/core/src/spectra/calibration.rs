use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PIXELS;
use crate::error::{Error, Result};

/// Vendor pixel→wavelength polynomial `λ = a0 + Σ bᵢ·xⁱ`, i = 1..5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelCalibration {
    pub a0: f64,
    pub b: [f64; 5],
}

impl Default for PixelCalibration {
    /// Linear 340 → 780 nm over 256 pixels.
    fn default() -> Self {
        Self::linear(340.0, 780.0)
    }
}

impl PixelCalibration {
    pub fn new(a0: f64, b: [f64; 5]) -> Result<Self> {
        let cal = Self { a0, b };
        cal.wavelength_grid()?;
        Ok(cal)
    }

    pub fn linear(first_nm: f64, last_nm: f64) -> Self {
        Self {
            a0: first_nm,
            b: [(last_nm - first_nm) / (PIXELS - 1) as f64, 0.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn pixel_to_wavelength(&self, pixel: usize) -> Result<f64> {
        if pixel >= PIXELS {
            return Err(Error::PixelOutOfRange(pixel));
        }
        Ok(self.eval(pixel as f64))
    }

    fn eval(&self, x: f64) -> f64 {
        let tail = self.b.iter().rev().fold(0.0, |acc, &bi| acc * x + bi);
        self.a0 + tail * x
    }

    /// Wavelength of every pixel; rejects maps that are not strictly increasing.
    pub fn wavelength_grid(&self) -> Result<Vec<f64>> {
        let grid: Vec<f64> = (0..PIXELS).map(|p| self.eval(p as f64)).collect();
        if let Some(i) = grid.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonMonotoneCalibration { pixel: i });
        }
        if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneCalibration { pixel: i + 1 });
        }
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::file(path))?;
        let cal: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: Some(e.line() as u64),
            message: e.to_string(),
        })?;
        cal.wavelength_grid().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: None,
            message: e.to_string(),
        })?;
        Ok(cal)
    }
}
