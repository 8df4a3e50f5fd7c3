//! Spectrometer data: pixel calibration, raw frames, reflectance
//! normalisation and smoothing.

mod calibration;
mod frame;
mod reflectance;
mod smooth;

pub use calibration::PixelCalibration;
pub use frame::{saturation_report, FrameKind, SaturationReport, SpectrumFrame};
pub use reflectance::{
    measure_reflectance, normalized_reflectance, CalibrationSession, ReferenceReflectance,
    DENOMINATOR_GUARD_COUNTS,
};
pub use smooth::{boxcar, Smooth, DEFAULT_WINDOW, MAX_WINDOW};

/// Pixels per spectrometer readout.
pub const PIXELS: usize = 256;
/// Full-scale count of the 10-bit ADC.
pub const ADC_MAX: u16 = 1023;
