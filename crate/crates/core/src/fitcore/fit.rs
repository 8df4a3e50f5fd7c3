use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dogbox::{dogbox, DogboxOptions, LeastSquaresProblem, Termination};
use super::metrics::{r_squared, Gate, GateThresholds, RmseKind};
use super::params::{Bounds, FitParams};
use super::problem::FitProblem;
use crate::error::{Error, Result};
use crate::optics::{FilmStack, PolarizationMode, ReflectanceCurve};

/// Trust-region scale per parameter (nm, dimensionless, degrees).
const PARAM_SCALE: [f64; 3] = [1.0, 1e-3, 1e-2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub solver: DogboxOptions,
    /// Spacing of multistart thickness seeds, nm.
    pub multistart_spacing_nm: f64,
    pub polarization: PolarizationMode,
    pub rmse_kind: RmseKind,
    pub gate: GateThresholds,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            solver: DogboxOptions::default(),
            multistart_spacing_nm: 25.0,
            polarization: PolarizationMode::Unpolarized,
            rmse_kind: RmseKind::default(),
            gate: GateThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FitParams,
    /// Gate RMSE, computed with `rmse_kind`.
    pub rmse: f64,
    pub rmse_kind: RmseKind,
    pub r_squared: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub gate: Gate,
    /// Euclidean norm of the final residual vector.
    pub residual_norm: f64,
    pub valid_pixels: usize,
}

struct Adapter<'a> {
    problem: &'a mut FitProblem,
    base: FitParams,
    free: Vec<usize>,
}

impl Adapter<'_> {
    fn params(&self, x: &[f64]) -> FitParams {
        let mut a = self.base.to_array();
        for (k, &i) in self.free.iter().enumerate() {
            a[i] = x[k];
        }
        FitParams::from_array(a)
    }
}

impl LeastSquaresProblem for Adapter<'_> {
    fn residuals(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.params(x);
        self.problem.residuals(&p)
    }

    fn jacobian(&mut self, x: &[f64], residuals: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.params(x);
        self.problem.jacobian_fd_with(&p, residuals)
    }
}

/// Bounded dogleg fit of the template to a measured curve.
pub fn dogbox_fit(
    measured: &ReflectanceCurve,
    template: &FilmStack,
    init: FitParams,
    bounds: Bounds,
    opts: &FitOptions,
) -> Result<FitResult> {
    let mut problem = FitProblem::new(measured, template, bounds)?.with_polarization(opts.polarization);
    fit_problem(&mut problem, init, opts)
}

pub(crate) fn fit_problem(problem: &mut FitProblem, init: FitParams, opts: &FitOptions) -> Result<FitResult> {
    let bounds = *problem.bounds();
    if !bounds.contains(&init) {
        return Err(Error::BoundsViolation(format!("initial parameters {init:?} outside bounds")));
    }
    let free = bounds.free_indices();
    let x0: Vec<f64> = free.iter().map(|&i| init.to_array()[i]).collect();
    let lower: Vec<f64> = free.iter().map(|&i| bounds.lower[i]).collect();
    let upper: Vec<f64> = free.iter().map(|&i| bounds.upper[i]).collect();
    let scale: Vec<f64> = free.iter().map(|&i| PARAM_SCALE[i]).collect();

    let mut adapter = Adapter {
        problem,
        base: init,
        free,
    };
    let report = dogbox(&mut adapter, &x0, &lower, &upper, &scale, &opts.solver)?;
    let params = adapter.params(&report.x);
    let problem = adapter.problem;

    let fitted = problem.model(&params)?;
    let measured = problem.measured();
    let rmse = opts.rmse_kind.evaluate(measured, &fitted)?;
    let r2 = r_squared(measured, &fitted)?;
    Ok(FitResult {
        params,
        rmse,
        rmse_kind: opts.rmse_kind,
        r_squared: r2,
        iterations: report.iterations,
        converged: report.termination.converged(),
        termination: report.termination,
        gate: opts.gate.evaluate(rmse, r2),
        residual_norm: report.residuals.iter().map(|r| r * r).sum::<f64>().sqrt(),
        valid_pixels: measured.len(),
    })
}

/// Number of seeds that places one every `spacing_nm` across the thickness bounds.
pub fn default_start_count(bounds: &Bounds, spacing_nm: f64) -> usize {
    let width = bounds.upper[0] - bounds.lower[0];
    ((width / spacing_nm).round() as usize).max(1)
}

/// Thickness seeds at the centres of `n_starts` equal cells spanning the bounds.
pub fn start_thicknesses(bounds: &Bounds, n_starts: usize) -> Vec<f64> {
    let (lo, hi) = (bounds.lower[0], bounds.upper[0]);
    let cell = (hi - lo) / n_starts as f64;
    (0..n_starts).map(|i| lo + (i as f64 + 0.5) * cell).collect()
}

/// Relative RMSE difference below which two fits count as tied.
const TIE_RTOL: f64 = 1e-9;

/// Runs [`dogbox_fit`] from evenly spaced thickness seeds and keeps the fit
/// with the lowest RMSE, preferring the thinner film on ties.
///
/// Parameters other than thickness start from `base` (clamped into bounds).
pub fn multistart_fit(
    measured: &ReflectanceCurve,
    template: &FilmStack,
    base: FitParams,
    bounds: Bounds,
    n_starts: usize,
    opts: &FitOptions,
) -> Result<FitResult> {
    if n_starts == 0 {
        return Err(Error::Config("multistart needs at least one start".into()));
    }
    let mut problem = FitProblem::new(measured, template, bounds)?.with_polarization(opts.polarization);
    let mut base = base.to_array();
    for i in 1..3 {
        if bounds.free[i] {
            base[i] = base[i].clamp(bounds.lower[i], bounds.upper[i]);
        }
    }

    let mut best: Option<FitResult> = None;
    let mut errors = Vec::new();
    for d in start_thicknesses(&bounds, n_starts) {
        let mut init = base;
        init[0] = d;
        match fit_problem(&mut problem, FitParams::from_array(init), opts) {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        let tol = TIE_RTOL * b.rmse.max(r.rmse);
                        if (r.rmse - b.rmse).abs() <= tol {
                            r.params.thickness_nm < b.params.thickness_nm
                        } else {
                            r.rmse < b.rmse
                        }
                    }
                };
                if better {
                    best = Some(r);
                }
            }
            Err(e) => errors.push(format!("start {d:.2} nm: {e}")),
        }
    }
    best.ok_or(Error::AllStartsFailed(errors))
}
