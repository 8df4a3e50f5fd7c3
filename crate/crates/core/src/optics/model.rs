//! Single-film reflectance model.
//!
//! Interfaces are ambient (0) / film (1) / substrate (2). With amplitude
//! coefficients `r01`, `r12` and film phase thickness `φ₁ = (2π/λ)·d·N₁·cosθ₁`
//! the reflectance is
//!
//! ```text
//! R′ = |r01 + r12·e^{-2iφ₁}|² / |1 + r01·r12·e^{-2iφ₁}|²
//! ```
//!
//! which for real coefficients and real `φ₁` expands to the familiar
//! `(r01² + r12² + 2r01r12cos2φ₁) / (1 + r01²r12² + 2r01r12cos2φ₁)`
//! (see [`FresnelPair::reflectance`](super::FresnelPair::reflectance)). The
//! complex form is kept so that an absorbing substrate or film is handled
//! exactly rather than through the real part of the coefficients.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::curve::ReflectanceCurve;
use super::dispersion::MaterialDispersion;
use super::fresnel::{cos_refraction_angle, fresnel_r, Polarization, PolarizationMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FilmStack {
    pub ambient: Arc<MaterialDispersion>,
    pub film: Arc<MaterialDispersion>,
    pub substrate: Arc<MaterialDispersion>,
    thickness_nm: f64,
    incidence_deg: f64,
    film_index_scale: f64,
}

impl FilmStack {
    pub fn new(
        ambient: Arc<MaterialDispersion>,
        film: Arc<MaterialDispersion>,
        substrate: Arc<MaterialDispersion>,
        thickness_nm: f64,
        incidence_deg: f64,
    ) -> Result<Self> {
        Self {
            ambient,
            film,
            substrate,
            thickness_nm: 0.0,
            incidence_deg: 0.0,
            film_index_scale: 1.0,
        }
        .with_thickness(thickness_nm)?
        .with_incidence(incidence_deg)
    }

    /// Air / SiO₂ / Si with the bundled tables.
    pub fn sio2_on_si(thickness_nm: f64) -> Result<Self> {
        Self::new(
            Arc::new(MaterialDispersion::air()),
            Arc::new(MaterialDispersion::sio2()),
            Arc::new(MaterialDispersion::si()),
            thickness_nm,
            0.0,
        )
    }

    pub fn with_thickness(mut self, thickness_nm: f64) -> Result<Self> {
        if !(thickness_nm >= 0.0 && thickness_nm.is_finite()) {
            return Err(Error::InvalidStack(format!("thickness {thickness_nm} nm must be >= 0")));
        }
        self.thickness_nm = thickness_nm;
        Ok(self)
    }

    pub fn with_incidence(mut self, incidence_deg: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&incidence_deg) {
            return Err(Error::InvalidStack(format!(
                "incidence {incidence_deg}° must lie in [0, 90)"
            )));
        }
        self.incidence_deg = incidence_deg;
        Ok(self)
    }

    /// Multiplier applied to the real part of the film index.
    pub fn with_film_index_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidStack(format!("index scale {scale} must be > 0")));
        }
        self.film_index_scale = scale;
        Ok(self)
    }

    pub fn thickness_nm(&self) -> f64 {
        self.thickness_nm
    }

    pub fn incidence_deg(&self) -> f64 {
        self.incidence_deg
    }

    pub fn film_index_scale(&self) -> f64 {
        self.film_index_scale
    }

    pub fn film_index(&self, lambda_nm: f64) -> Result<Complex64> {
        let n = self.film.refractive_index(lambda_nm)?;
        Ok(Complex64::new(n.re * self.film_index_scale, n.im))
    }

    /// Indices and direction cosines in the three media.
    fn media(&self, lambda_nm: f64) -> Result<[(Complex64, Complex64); 3]> {
        let n0 = self.ambient.refractive_index(lambda_nm)?;
        let n1 = self.film_index(lambda_nm)?;
        let n2 = self.substrate.refractive_index(lambda_nm)?;
        let cos0 = Complex64::new(self.incidence_deg.to_radians().cos(), 0.0);
        let cos1 = cos_refraction_angle(n0, cos0, n1);
        let cos2 = cos_refraction_angle(n0, cos0, n2);
        Ok([(n0, cos0), (n1, cos1), (n2, cos2)])
    }

    /// Bare ambient/substrate reflectance, i.e. the same stack without the film.
    pub fn bare_substrate_reflectance(&self, lambda_nm: f64, mode: PolarizationMode) -> Result<f64> {
        let [(n0, c0), _, (n2, c2)] = self.media(lambda_nm)?;
        average_over(mode, |pol| Ok(fresnel_r(n0, c0, n2, c2, pol)?.norm_sqr()))
    }
}

/// φ₁ = (2π/λ)·d·N₁·cosθ₁ with θ₁ the refraction angle inside the film.
pub fn phase_thickness(stack: &FilmStack, lambda_nm: f64) -> Result<Complex64> {
    let [_, (n1, cos1), _] = stack.media(lambda_nm)?;
    Ok(2.0 * PI / lambda_nm * stack.thickness_nm * n1 * cos1)
}

/// Complex single-film reflectance for given coefficients and film phase.
pub fn airy_reflectance(r01: Complex64, r12: Complex64, phi1: Complex64) -> f64 {
    let e = (Complex64::new(0.0, -2.0) * phi1).exp();
    let num = r01 + r12 * e;
    let den = Complex64::new(1.0, 0.0) + r01 * r12 * e;
    num.norm_sqr() / den.norm_sqr()
}

pub fn model_reflectance(stack: &FilmStack, lambda_nm: f64, mode: PolarizationMode) -> Result<f64> {
    let [(n0, c0), (n1, c1), (n2, c2)] = stack.media(lambda_nm)?;
    let phi1 = 2.0 * PI / lambda_nm * stack.thickness_nm * n1 * c1;
    let r = average_over(mode, |pol| {
        let r01 = fresnel_r(n0, c0, n1, c1, pol)?;
        let r12 = fresnel_r(n1, c1, n2, c2, pol)?;
        Ok(airy_reflectance(r01, r12, phi1))
    })?;
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&r), "reflectance {r} out of range");
    Ok(r.clamp(0.0, 1.0))
}

pub fn model_curve(stack: &FilmStack, wavelengths: &[f64]) -> Result<ReflectanceCurve> {
    let grid = ModelGrid::new(stack, wavelengths, PolarizationMode::Unpolarized)?;
    let mut values = vec![0.0; wavelengths.len()];
    grid.reflectance_into(stack.thickness_nm, &mut values);
    ReflectanceCurve::from_values(wavelengths, &values)
}

fn average_over(mode: PolarizationMode, mut f: impl FnMut(Polarization) -> Result<f64>) -> Result<f64> {
    match mode {
        PolarizationMode::S => f(Polarization::S),
        PolarizationMode::P => f(Polarization::P),
        PolarizationMode::Unpolarized => Ok(0.5 * (f(Polarization::S)? + f(Polarization::P)?)),
    }
}

#[derive(Debug, Clone, Copy)]
struct InterfaceTerms {
    r01: Complex64,
    r12: Complex64,
}

/// Thickness-independent part of the model precomputed on a wavelength grid.
///
/// Only the film phase depends on `d`, so a fit that varies thickness alone
/// evaluates one complex exponential per wavelength and polarisation.
#[derive(Debug, Clone)]
pub struct ModelGrid {
    wavelengths: Vec<f64>,
    /// `2·(2π/λ)·N₁·cosθ₁` per wavelength: 2φ₁ = `twice_phase_per_nm · d`.
    twice_phase_per_nm: Vec<Complex64>,
    terms: Vec<[InterfaceTerms; 2]>,
    /// Number of polarisations that contribute (1 when s and p coincide).
    pols: usize,
}

impl ModelGrid {
    pub fn new(stack: &FilmStack, wavelengths: &[f64], mode: PolarizationMode) -> Result<Self> {
        // At exact normal incidence s and p give the same reflectance.
        let pols: &[Polarization] = match mode {
            PolarizationMode::S => &[Polarization::S],
            PolarizationMode::P => &[Polarization::P],
            PolarizationMode::Unpolarized if stack.incidence_deg == 0.0 => &[Polarization::S],
            PolarizationMode::Unpolarized => &[Polarization::S, Polarization::P],
        };
        let mut twice_phase_per_nm = Vec::with_capacity(wavelengths.len());
        let mut terms = Vec::with_capacity(wavelengths.len());
        for &lambda in wavelengths {
            let [(n0, c0), (n1, c1), (n2, c2)] = stack.media(lambda)?;
            twice_phase_per_nm.push(4.0 * PI / lambda * n1 * c1);
            let zero = InterfaceTerms {
                r01: Complex64::new(0.0, 0.0),
                r12: Complex64::new(0.0, 0.0),
            };
            let mut t = [zero; 2];
            for (slot, &pol) in t.iter_mut().zip(pols) {
                *slot = InterfaceTerms {
                    r01: fresnel_r(n0, c0, n1, c1, pol)?,
                    r12: fresnel_r(n1, c1, n2, c2, pol)?,
                };
            }
            terms.push(t);
        }
        Ok(Self {
            wavelengths: wavelengths.to_vec(),
            twice_phase_per_nm,
            terms,
            pols: pols.len(),
        })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn reflectance_into(&self, thickness_nm: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.wavelengths.len());
        let inv = 1.0 / self.pols as f64;
        for ((o, beta), terms) in out.iter_mut().zip(&self.twice_phase_per_nm).zip(&self.terms) {
            // e^{-2iφ₁} with 2φ₁ = β·d
            let arg = *beta * thickness_nm;
            let (s, c) = arg.re.sin_cos();
            let e = Complex64::new(c, -s) * arg.im.exp();
            let mut acc = 0.0;
            for t in &terms[..self.pols] {
                let num = t.r01 + t.r12 * e;
                let den = Complex64::new(1.0, 0.0) + t.r01 * t.r12 * e;
                acc += num.norm_sqr() / den.norm_sqr();
            }
            *o = (acc * inv).clamp(0.0, 1.0);
        }
    }

    pub fn reflectance(&self, thickness_nm: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.wavelengths.len()];
        self.reflectance_into(thickness_nm, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(d: f64) -> FilmStack {
        FilmStack::sio2_on_si(d).unwrap()
    }

    #[test]
    fn zero_thickness_collapses_to_bare_interface() {
        for theta in [0.0, 0.5, 30.0, 70.0] {
            let s = stack(0.0).with_incidence(theta).unwrap();
            for lambda in [450.0, 550.0, 633.0, 700.0] {
                for mode in [PolarizationMode::S, PolarizationMode::P, PolarizationMode::Unpolarized] {
                    let r = model_reflectance(&s, lambda, mode).unwrap();
                    let bare = s.bare_substrate_reflectance(lambda, mode).unwrap();
                    assert!((r - bare).abs() <= 1e-12, "{theta} {lambda} {mode:?}: {r} vs {bare}");
                }
            }
        }
    }

    #[test]
    fn index_matched_substrate_gives_r01_squared() {
        let sio2 = Arc::new(MaterialDispersion::sio2());
        let s = FilmStack::new(Arc::new(MaterialDispersion::air()), sio2.clone(), sio2, 250.0, 0.0).unwrap();
        let n1 = s.film_index(600.0).unwrap().re;
        let r01 = (1.0 - n1) / (1.0 + n1);
        let r = model_reflectance(&s, 600.0, PolarizationMode::Unpolarized).unwrap();
        assert!((r - r01 * r01).abs() < 1e-14);
    }

    #[test]
    fn phase_is_linear_in_thickness() {
        assert_eq!(phase_thickness(&stack(0.0), 600.0).unwrap(), Complex64::new(0.0, 0.0));
        let a = phase_thickness(&stack(150.0), 600.0).unwrap();
        let b = phase_thickness(&stack(300.0), 600.0).unwrap();
        assert!((b - 2.0 * a).norm() < 1e-12);
    }

    #[test]
    fn phase_at_600nm_normal_incidence() {
        // k'·d·n₁ = (2π/600)·300·1.458038 evaluated by hand (n₁ from the 600 nm table row).
        let phi = phase_thickness(&stack(300.0), 600.0).unwrap();
        assert!((phi.re - 4.5805614694547545).abs() < 1e-12, "{phi}");
        assert_eq!(phi.im, 0.0);
    }

    #[test]
    fn grid_matches_pointwise_model() {
        let s = stack(300.0).with_incidence(12.0).unwrap();
        let wl: Vec<f64> = (0..50).map(|i| 450.0 + 5.0 * i as f64).collect();
        let grid = ModelGrid::new(&s, &wl, PolarizationMode::Unpolarized).unwrap();
        for (lambda, r) in wl.iter().zip(grid.reflectance(300.0)) {
            let direct = model_reflectance(&s, *lambda, PolarizationMode::Unpolarized).unwrap();
            assert!((direct - r).abs() < 1e-14);
        }
    }

    #[test]
    fn model_curve_edge_cases() {
        assert!(model_curve(&stack(300.0), &[]).unwrap().is_empty());
        let c = model_curve(&stack(300.0), &[550.0]).unwrap();
        let direct = model_reflectance(&stack(300.0), 550.0, PolarizationMode::Unpolarized).unwrap();
        assert_eq!(c.points()[0].reflectance, direct);
        assert!(c.points()[0].valid);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(stack(300.0).with_thickness(-1.0).is_err());
        assert!(stack(300.0).with_incidence(90.0).is_err());
        assert!(stack(300.0).with_film_index_scale(0.0).is_err());
        assert!(model_reflectance(&stack(300.0), 1200.0, PolarizationMode::S).is_err());
    }
}
