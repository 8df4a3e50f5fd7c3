//! Forward optical model of a single transparent film on a substrate.

mod curve;
mod dispersion;
mod fresnel;
mod model;

pub use curve::{CurvePoint, ReflectanceCurve};
pub use dispersion::{DispersionSample, MaterialDispersion, REQUIRED_SPAN_NM};
pub(crate) use dispersion::csv_error;
pub use fresnel::{cos_refraction_angle, fresnel_r, FresnelPair, Polarization, PolarizationMode};
pub use model::{airy_reflectance, model_curve, model_reflectance, phase_thickness, FilmStack, ModelGrid};
