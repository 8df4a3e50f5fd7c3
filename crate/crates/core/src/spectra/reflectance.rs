use serde::{Deserialize, Serialize};

use super::frame::{FrameKind, SpectrumFrame};
use super::PIXELS;
use crate::error::{Error, Result};
use crate::optics::{CurvePoint, ReflectanceCurve};

/// Pixels whose reference signal `I_U − I_D` does not exceed this many counts
/// are flagged invalid instead of being divided through.
pub const DENOMINATOR_GUARD_COUNTS: f64 = 5.0;

/// Absolute reflectance `R_u` of the uncoated reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceReflectance {
    Constant(f64),
    /// One value per pixel.
    Curve(Vec<f64>),
}

impl Default for ReferenceReflectance {
    fn default() -> Self {
        Self::Constant(1.0)
    }
}

impl ReferenceReflectance {
    fn at(&self, pixel: usize) -> f64 {
        match self {
            Self::Constant(r) => *r,
            Self::Curve(v) => v[pixel],
        }
    }
}

/// Uncoated and dark reference frames captured at the calibration point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSession {
    pub uncoated: SpectrumFrame,
    pub dark: SpectrumFrame,
    pub reference: ReferenceReflectance,
}

impl CalibrationSession {
    pub fn new(uncoated: SpectrumFrame, dark: SpectrumFrame, reference: ReferenceReflectance) -> Result<Self> {
        if uncoated.kind() != FrameKind::Uncoated || dark.kind() != FrameKind::Dark {
            return Err(Error::MismatchedFrames(format!(
                "expected uncoated + dark frames, got {} + {}",
                uncoated.kind().as_str(),
                dark.kind().as_str()
            )));
        }
        check_pair(&uncoated, &dark)?;
        if let ReferenceReflectance::Curve(v) = &reference {
            if v.len() != PIXELS {
                return Err(Error::LengthMismatch { left: v.len(), right: PIXELS });
            }
        }
        Ok(Self { uncoated, dark, reference })
    }

    pub fn sensor_id(&self) -> u8 {
        self.uncoated.sensor_id()
    }
}

fn check_pair(a: &SpectrumFrame, b: &SpectrumFrame) -> Result<()> {
    if a.sensor_id() != b.sensor_id() {
        return Err(Error::MismatchedFrames(format!(
            "sensor {} vs sensor {}",
            a.sensor_id(),
            b.sensor_id()
        )));
    }
    if a.integration_time_us() != b.integration_time_us() {
        return Err(Error::MismatchedFrames(format!(
            "integration time {} µs vs {} µs",
            a.integration_time_us(),
            b.integration_time_us()
        )));
    }
    Ok(())
}

/// Per-pixel `R_C = (I_C − I_D) / (I_U − I_D) · R_u` on real-valued intensities.
///
/// `None` marks pixels whose reference signal is at or below `guard`.
pub fn normalized_reflectance(
    coated: &[f64],
    uncoated: &[f64],
    dark: &[f64],
    reference: &[f64],
    guard: f64,
) -> Result<Vec<Option<f64>>> {
    let n = coated.len();
    for other in [uncoated.len(), dark.len(), reference.len()] {
        if other != n {
            return Err(Error::LengthMismatch { left: n, right: other });
        }
    }
    Ok((0..n)
        .map(|i| {
            let den = uncoated[i] - dark[i];
            if den <= guard {
                return None;
            }
            let r = (coated[i] - dark[i]) / den * reference[i];
            r.is_finite().then_some(r)
        })
        .collect())
}

/// Measured reflectance of a coated frame against its calibration session.
///
/// A pixel is invalid when the reference signal is within the denominator
/// guard or when any of the three frames is saturated there.
pub fn measure_reflectance(
    coated: &SpectrumFrame,
    session: &CalibrationSession,
    wavelengths: &[f64],
) -> Result<ReflectanceCurve> {
    if coated.kind() != FrameKind::Coated {
        return Err(Error::MismatchedFrames(format!(
            "expected a coated frame, got {}",
            coated.kind().as_str()
        )));
    }
    check_pair(coated, &session.uncoated)?;
    if wavelengths.len() != PIXELS {
        return Err(Error::LengthMismatch { left: wavelengths.len(), right: PIXELS });
    }
    let as_f64 = |f: &SpectrumFrame| f.counts().iter().map(|&c| f64::from(c)).collect::<Vec<_>>();
    let reference: Vec<f64> = (0..PIXELS).map(|p| session.reference.at(p)).collect();
    let values = normalized_reflectance(
        &as_f64(coated),
        &as_f64(&session.uncoated),
        &as_f64(&session.dark),
        &reference,
        DENOMINATOR_GUARD_COUNTS,
    )?;
    let points: Vec<CurvePoint> = values
        .iter()
        .enumerate()
        .map(|(p, v)| {
            let saturated = coated.is_saturated(p) || session.uncoated.is_saturated(p) || session.dark.is_saturated(p);
            CurvePoint {
                wavelength_nm: wavelengths[p],
                reflectance: v.unwrap_or(f64::NAN),
                valid: v.is_some() && !saturated,
            }
        })
        .collect();
    let curve = ReflectanceCurve::new(points)?;
    if curve.valid_count() == 0 {
        return Err(Error::NoValidPixels);
    }
    Ok(curve)
}
