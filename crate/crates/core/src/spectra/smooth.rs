use super::frame::SpectrumFrame;
use super::ADC_MAX;
use crate::error::{Error, Result};
use crate::optics::ReflectanceCurve;

pub const DEFAULT_WINDOW: usize = 5;
pub const MAX_WINDOW: usize = 31;

/// Centred moving average with replicate-edge padding; output length equals
/// input length and `window == 1` is the identity.
pub fn boxcar(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) || window > MAX_WINDOW {
        return Err(Error::InvalidWindow(window));
    }
    let n = values.len();
    if n == 0 || window == 1 {
        return Ok(values.to_vec());
    }
    let half = (window / 2) as isize;
    let at = |i: isize| values[i.clamp(0, n as isize - 1) as usize];
    let inv = 1.0 / window as f64;
    Ok((0..n as isize)
        .map(|i| (-half..=half).map(|o| at(i + o)).sum::<f64>() * inv)
        .collect())
}

pub trait Smooth: Sized {
    fn smooth(&self, window: usize) -> Result<Self>;
}

impl Smooth for ReflectanceCurve {
    /// Smooths the valid points as one contiguous series; invalid points are
    /// left untouched.
    fn smooth(&self, window: usize) -> Result<Self> {
        let (_, values) = self.valid_series();
        Ok(self.map_valid_values(&boxcar(&values, window)?))
    }
}

impl Smooth for SpectrumFrame {
    /// Smoothed counts are rounded back onto the ADC scale.
    fn smooth(&self, window: usize) -> Result<Self> {
        let values: Vec<f64> = self.counts().iter().map(|&c| f64::from(c)).collect();
        let counts = boxcar(&values, window)?
            .into_iter()
            .map(|v| v.round().clamp(0.0, f64::from(ADC_MAX)) as u16)
            .collect();
        SpectrumFrame::new(self.sensor_id(), counts, self.integration_time_us(), self.kind())
    }
}
