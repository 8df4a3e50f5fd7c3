use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub wavelength_nm: f64,
    pub reflectance: f64,
    pub valid: bool,
}

/// Reflectance against wavelength, either modelled or measured.
///
/// Measured curves can exceed 1 through noise; a point is only ever flagged
/// valid when its value is finite.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReflectanceCurve {
    points: Vec<CurvePoint>,
}

impl ReflectanceCurve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self> {
        if let Some(i) = points
            .windows(2)
            .position(|w| !(w[1].wavelength_nm > w[0].wavelength_nm))
        {
            return Err(Error::InvalidFrame(format!(
                "curve wavelengths not strictly increasing at index {}",
                i + 1
            )));
        }
        let points = points
            .into_iter()
            .map(|p| CurvePoint {
                valid: p.valid && p.reflectance.is_finite(),
                ..p
            })
            .collect();
        Ok(Self { points })
    }

    /// Every point valid.
    pub fn from_values(wavelengths: &[f64], values: &[f64]) -> Result<Self> {
        if wavelengths.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: wavelengths.len(),
                right: values.len(),
            });
        }
        Self::new(
            wavelengths
                .iter()
                .zip(values)
                .map(|(&w, &r)| CurvePoint {
                    wavelength_nm: w,
                    reflectance: r,
                    valid: true,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn valid_points(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(|p| p.valid)
    }

    pub fn valid_count(&self) -> usize {
        self.valid_points().count()
    }

    /// Wavelengths and values of the valid points.
    pub fn valid_series(&self) -> (Vec<f64>, Vec<f64>) {
        self.valid_points().map(|p| (p.wavelength_nm, p.reflectance)).unzip()
    }

    /// Keeps only points inside `[lo, hi]` nm.
    pub fn restricted_to(&self, lo: f64, hi: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .filter(|p| p.wavelength_nm >= lo && p.wavelength_nm <= hi)
                .copied()
                .collect(),
        }
    }

    pub(crate) fn map_valid_values(&self, values: &[f64]) -> Self {
        let mut it = values.iter();
        let points = self
            .points
            .iter()
            .map(|p| {
                if p.valid {
                    let r = *it.next().expect("one value per valid point");
                    CurvePoint {
                        reflectance: r,
                        valid: r.is_finite(),
                        ..*p
                    }
                } else {
                    *p
                }
            })
            .collect();
        Self { points }
    }
}
