use nalgebra::DMatrix;

use super::params::{Bounds, FitParams};
use crate::error::{Error, Result};
use crate::optics::{FilmStack, ModelGrid, PolarizationMode, ReflectanceCurve};

/// Fewest valid pixels a curve must have before it is fitted.
pub const MIN_VALID_PIXELS: usize = 8;

const REL_STEP: f64 = 1e-6;
/// Absolute step floors: 1e-4 nm for thickness, then index scale and degrees.
const STEP_FLOOR: [f64; 3] = [1e-4, 1e-6, 1e-6];

/// Residuals `measured − model` over the valid pixels of one curve, against a
/// stack template whose thickness, index scale and incidence come from
/// [`FitParams`].
#[derive(Debug, Clone)]
pub struct FitProblem {
    template: FilmStack,
    wavelengths: Vec<f64>,
    measured: Vec<f64>,
    bounds: Bounds,
    polarization: PolarizationMode,
    grid: Option<(f64, f64, ModelGrid)>,
}

impl FitProblem {
    pub fn new(measured: &ReflectanceCurve, template: &FilmStack, bounds: Bounds) -> Result<Self> {
        bounds.validate()?;
        let (wavelengths, values) = measured.valid_series();
        if wavelengths.len() < MIN_VALID_PIXELS {
            return Err(Error::TooFewValidPixels {
                found: wavelengths.len(),
                required: MIN_VALID_PIXELS,
            });
        }
        Ok(Self {
            template: template.clone(),
            wavelengths,
            measured: values,
            bounds,
            polarization: PolarizationMode::Unpolarized,
            grid: None,
        })
    }

    pub fn with_polarization(mut self, mode: PolarizationMode) -> Self {
        self.polarization = mode;
        self.grid = None;
        self
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn measured(&self) -> &[f64] {
        &self.measured
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn len(&self) -> usize {
        self.measured.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measured.is_empty()
    }

    /// Model values at the valid wavelengths.
    pub fn model(&mut self, params: &FitParams) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.measured.len()];
        self.model_into(params, &mut out)?;
        Ok(out)
    }

    fn model_into(&mut self, params: &FitParams, out: &mut [f64]) -> Result<()> {
        let stale = match &self.grid {
            Some((scale, theta, _)) => *scale != params.index_scale || *theta != params.theta0_deg,
            None => true,
        };
        if stale {
            let stack = self
                .template
                .clone()
                .with_film_index_scale(params.index_scale)?
                .with_incidence(params.theta0_deg)?;
            let grid = ModelGrid::new(&stack, &self.wavelengths, self.polarization)?;
            self.grid = Some((params.index_scale, params.theta0_deg, grid));
        }
        if !(params.thickness_nm >= 0.0) {
            return Err(Error::BoundsViolation(format!("thickness {} nm", params.thickness_nm)));
        }
        let (_, _, grid) = self.grid.as_ref().expect("grid initialised above");
        grid.reflectance_into(params.thickness_nm, out);
        Ok(())
    }

    pub fn residuals(&mut self, params: &FitParams) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.measured.len()];
        self.residuals_into(params, &mut out)?;
        Ok(out)
    }

    pub fn residuals_into(&mut self, params: &FitParams, out: &mut [f64]) -> Result<()> {
        self.model_into(params, out)?;
        for (r, y) in out.iter_mut().zip(&self.measured) {
            *r = y - *r;
        }
        Ok(())
    }

    /// Forward-difference Jacobian of the residuals, one column per free
    /// parameter. Steps are taken backwards when a forward step would leave
    /// the bounds.
    pub fn jacobian_fd(&mut self, params: &FitParams) -> Result<DMatrix<f64>> {
        let base = self.residuals(params)?;
        self.jacobian_fd_with(params, &base)
    }

    pub(crate) fn jacobian_fd_with(&mut self, params: &FitParams, base: &[f64]) -> Result<DMatrix<f64>> {
        let free = self.bounds.free_indices();
        let x = params.to_array();
        let mut jac = DMatrix::zeros(base.len(), free.len());
        let mut shifted = vec![0.0; base.len()];
        for (col, &i) in free.iter().enumerate() {
            let mut h = (REL_STEP * x[i].abs()).max(STEP_FLOOR[i]);
            if x[i] + h > self.bounds.upper[i] {
                h = -h;
            }
            let mut xp = x;
            xp[i] += h;
            // Use the step that was actually representable.
            let h = xp[i] - x[i];
            self.residuals_into(&FitParams::from_array(xp), &mut shifted)?;
            for (row, (a, b)) in shifted.iter().zip(base).enumerate() {
                jac[(row, col)] = (a - b) / h;
            }
        }
        Ok(jac)
    }
}
