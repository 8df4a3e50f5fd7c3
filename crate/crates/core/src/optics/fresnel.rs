use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    S,
    P,
}

/// Polarisation state used when turning amplitude coefficients into a
/// reflectance. LED illumination is unpolarised, hence the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationMode {
    S,
    P,
    #[default]
    Unpolarized,
}

/// Real-valued coefficient pair as used by the printed single-film formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPair {
    pub r01: f64,
    pub r12: f64,
}

impl FresnelPair {
    pub fn new(r01: f64, r12: f64) -> Result<Self> {
        if r01.abs() > 1.0 || r12.abs() > 1.0 {
            return Err(Error::InvalidStack(format!(
                "reflection coefficients must satisfy |r| <= 1, got {r01}, {r12}"
            )));
        }
        Ok(Self { r01, r12 })
    }

    /// `(r01² + r12² + 2 r01 r12 cos 2φ) / (1 + r01² r12² + 2 r01 r12 cos 2φ)`.
    pub fn reflectance(&self, phi: f64) -> f64 {
        let (a, b) = (self.r01, self.r12);
        let c = 2.0 * a * b * (2.0 * phi).cos();
        (a * a + b * b + c) / (1.0 + a * a * b * b + c)
    }
}

/// Cosine of the refraction angle in medium `n_to` (Snell's law).
///
/// Uses the principal square root, whose real part is non-negative; total
/// internal reflection shows up as a purely imaginary cosine.
pub fn cos_refraction_angle(n_from: Complex64, cos_theta_from: Complex64, n_to: Complex64) -> Complex64 {
    let ratio = n_from / n_to;
    let sin2 = Complex64::new(1.0, 0.0) - cos_theta_from * cos_theta_from;
    (Complex64::new(1.0, 0.0) - ratio * ratio * sin2).sqrt()
}

/// Amplitude reflection coefficient for light going from medium `i` into `j`.
pub fn fresnel_r(
    n_i: Complex64,
    cos_i: Complex64,
    n_j: Complex64,
    cos_j: Complex64,
    pol: Polarization,
) -> Result<Complex64> {
    let (num, den) = match pol {
        Polarization::S => (n_i * cos_i - n_j * cos_j, n_i * cos_i + n_j * cos_j),
        Polarization::P => (n_j * cos_i - n_i * cos_j, n_j * cos_i + n_i * cos_j),
    };
    if den.norm_sqr() < f64::MIN_POSITIVE || !den.is_finite() {
        return Err(Error::DegenerateInterface);
    }
    Ok(num / den)
}
