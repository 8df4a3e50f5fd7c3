//! Dogleg least squares in a rectangular trust region ("dogbox").
//!
//! Each iteration freezes variables that sit on a bound with the gradient
//! pointing outward, builds the Gauss-Newton step and the constrained Cauchy
//! step for the remaining ones, and walks the dogleg path until it leaves the
//! intersection of the box-shaped trust region with the feasible box. The
//! trust region shrinks on poor agreement between predicted and actual cost
//! reduction and grows when a good step was cut short by the trust region.
//!
//! References:
//! - C. Voglis, I. E. Lagaris, "A Rectangular Trust Region Dogleg Approach
//!   for Unconstrained and Bound Constrained Nonlinear Optimization", 2004.
//! - M. J. D. Powell, "A Hybrid Method for Nonlinear Equations", 1970.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DogboxOptions {
    pub ftol: f64,
    pub xtol: f64,
    pub gtol: f64,
    pub max_iterations: usize,
}

impl Default for DogboxOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-8,
            xtol: 1e-8,
            gtol: 1e-8,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Gradient,
    CostChange,
    StepSize,
    CostAndStep,
    MaxIterations,
}

impl Termination {
    pub fn converged(self) -> bool {
        self != Termination::MaxIterations
    }
}

/// Residual vector and Jacobian of a least-squares problem in `n` variables.
pub trait LeastSquaresProblem {
    fn residuals(&mut self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&mut self, x: &[f64], residuals: &[f64]) -> Result<DMatrix<f64>>;
}

#[derive(Debug, Clone)]
pub struct DogboxReport {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// ½‖f‖²
    pub cost: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Cost after every accepted iteration, starting with the initial cost.
    pub cost_history: Vec<f64>,
    /// Every accepted iterate, starting with `x0`.
    pub iterates: Vec<Vec<f64>>,
}

const INNER_ATTEMPTS: usize = 60;

pub fn dogbox<P: LeastSquaresProblem>(
    problem: &mut P,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    scale: &[f64],
    opts: &DogboxOptions,
) -> Result<DogboxReport> {
    let n = x0.len();
    if lower.len() != n || upper.len() != n || scale.len() != n {
        return Err(Error::LengthMismatch { left: n, right: lower.len().min(upper.len()).min(scale.len()) });
    }
    for i in 0..n {
        if !(lower[i] < upper[i]) || !(x0[i] >= lower[i] && x0[i] <= upper[i]) {
            return Err(Error::BoundsViolation(format!(
                "variable {i}: {} not within [{}, {}]",
                x0[i], lower[i], upper[i]
            )));
        }
    }

    let mut x = DVector::from_column_slice(x0);
    let lb = DVector::from_column_slice(lower);
    let ub = DVector::from_column_slice(upper);
    let scale = DVector::from_column_slice(scale);
    let scale_inv = scale.map(|s| 1.0 / s);

    let mut f = DVector::from_vec(problem.residuals(x.as_slice())?);
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteResiduals);
    }
    let mut evaluations = 1;
    let mut jac = problem.jacobian(x.as_slice(), f.as_slice())?;
    let mut cost = 0.5 * f.norm_squared();
    let mut g = jac.tr_mul(&f);

    // -1 on lower bound, +1 on upper bound, 0 interior.
    let mut on_bound: Vec<i8> = (0..n)
        .map(|i| {
            if x[i] <= lb[i] {
                -1
            } else if x[i] >= ub[i] {
                1
            } else {
                0
            }
        })
        .collect();

    let mut delta = x.component_mul(&scale_inv).amax();
    if delta == 0.0 {
        delta = 1.0;
    }

    let mut cost_history = vec![cost];
    let mut iterates = vec![x.as_slice().to_vec()];
    let mut iterations = 0;
    let mut termination = None;

    loop {
        let active: Vec<bool> = (0..n).map(|i| f64::from(on_bound[i]) * g[i] < 0.0).collect();
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let g_norm = (0..n).filter(|&i| !active[i]).map(|i| g[i].abs()).fold(0.0, f64::max);
        if g_norm < opts.gtol {
            termination = Some(Termination::Gradient);
        }
        if termination.is_some() || iterations >= opts.max_iterations {
            break;
        }

        let x_free = select(&x, &free);
        let lb_free = select(&lb, &free);
        let ub_free = select(&ub, &free);
        let scale_free = select(&scale, &free);
        let g_free = select(&g, &free);
        let j_free = jac.select_columns(free.iter());

        let newton = lstsq(&j_free, &(-&f));
        // Quadratic model along the anti-gradient: a·t² + b·t.
        let jg = &j_free * &g_free;
        let a = 0.5 * jg.norm_squared();
        let b = -g_free.norm_squared();

        let mut accepted = false;
        let mut step_norm;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let tr = &scale_free * delta;
            let (step_free, hits_free, tr_hit) = dogleg_step(&x_free, &newton, &g_free, a, b, &tr, &lb_free, &ub_free);
            let predicted = -(0.5 * (&j_free * &step_free).norm_squared() + g_free.dot(&step_free));

            let mut step = DVector::zeros(n);
            for (k, &i) in free.iter().enumerate() {
                step[i] = step_free[k];
            }
            let x_new = (&x + &step).zip_zip_map(&lb, &ub, |v, l, u| v.clamp(l, u));
            let f_new = DVector::from_vec(problem.residuals(x_new.as_slice())?);
            evaluations += 1;
            let step_h_norm = step.component_mul(&scale_inv).amax();
            step_norm = step.norm();

            if f_new.iter().any(|v| !v.is_finite()) {
                delta = 0.25 * step_h_norm;
                if attempts >= INNER_ATTEMPTS {
                    break;
                }
                continue;
            }
            let cost_new = 0.5 * f_new.norm_squared();
            let actual = cost - cost_new;

            let ratio = if predicted > 0.0 {
                actual / predicted
            } else if predicted == 0.0 && actual == 0.0 {
                1.0
            } else {
                0.0
            };
            if ratio < 0.25 {
                delta = 0.25 * step_h_norm;
            } else if ratio > 0.75 && tr_hit {
                delta *= 2.0;
            }

            let ftol_ok = actual.abs() < opts.ftol * cost && ratio > 0.25;
            let xtol_ok = step_norm < opts.xtol * (opts.xtol + x.norm());
            termination = match (ftol_ok, xtol_ok) {
                (true, true) => Some(Termination::CostAndStep),
                (true, false) => Some(Termination::CostChange),
                (false, true) => Some(Termination::StepSize),
                _ => None,
            };

            if actual > 0.0 {
                for (k, &i) in free.iter().enumerate() {
                    on_bound[i] = hits_free[k];
                }
                x = x_new;
                for i in 0..n {
                    match on_bound[i] {
                        -1 => x[i] = lb[i],
                        1 => x[i] = ub[i],
                        _ => {}
                    }
                }
                f = f_new;
                cost = cost_new;
                accepted = true;
                break;
            }
            if termination.is_some() || attempts >= INNER_ATTEMPTS {
                break;
            }
        }

        iterations += 1;
        if accepted {
            jac = problem.jacobian(x.as_slice(), f.as_slice())?;
            g = jac.tr_mul(&f);
            cost_history.push(cost);
            iterates.push(x.as_slice().to_vec());
        } else if termination.is_none() {
            // The trust region collapsed without any decrease.
            termination = Some(Termination::StepSize);
        }
    }

    Ok(DogboxReport {
        x: x.as_slice().to_vec(),
        residuals: f.as_slice().to_vec(),
        cost,
        iterations,
        evaluations,
        termination: termination.unwrap_or(Termination::MaxIterations),
        cost_history,
        iterates,
    })
}

fn select(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// Minimum-norm least-squares solution of `J·p = rhs`.
fn lstsq(j: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let svd = j.clone().svd(true, true);
    let tol = f64::EPSILON * j.nrows().max(j.ncols()) as f64 * svd.singular_values.max();
    svd.solve(rhs, tol).unwrap_or_else(|_| DVector::zeros(j.ncols()))
}

/// Largest `t ≥ 0` with `x + t·s` inside `[lb, ub]`, and which bound is hit
/// per component (-1 lower, +1 upper, 0 none).
fn step_size_to_bound(x: &DVector<f64>, s: &DVector<f64>, lb: &DVector<f64>, ub: &DVector<f64>) -> (f64, Vec<i8>) {
    let mut steps = vec![f64::INFINITY; x.len()];
    for i in 0..x.len() {
        if s[i] != 0.0 {
            let target = if s[i] > 0.0 { ub[i] } else { lb[i] };
            steps[i] = (target - x[i]) / s[i];
        }
    }
    let min = steps.iter().copied().fold(f64::INFINITY, f64::min);
    let hits = (0..x.len())
        .map(|i| if steps[i] == min && s[i] != 0.0 { s[i].signum() as i8 } else { 0 })
        .collect();
    (min, hits)
}

#[allow(clippy::too_many_arguments)]
fn dogleg_step(
    x: &DVector<f64>,
    newton: &DVector<f64>,
    g: &DVector<f64>,
    a: f64,
    b: f64,
    tr: &DVector<f64>,
    lb: &DVector<f64>,
    ub: &DVector<f64>,
) -> (DVector<f64>, Vec<i8>, bool) {
    let n = x.len();
    // Bounds of the step: trust region intersected with the feasible box.
    let lb_step = lb - x;
    let ub_step = ub - x;
    let mut lb_total = DVector::zeros(n);
    let mut ub_total = DVector::zeros(n);
    let mut orig_l = vec![false; n];
    let mut orig_u = vec![false; n];
    let mut tr_l = vec![false; n];
    let mut tr_u = vec![false; n];
    for i in 0..n {
        lb_total[i] = lb_step[i].max(-tr[i]);
        ub_total[i] = ub_step[i].min(tr[i]);
        orig_l[i] = lb_total[i] == lb_step[i];
        tr_l[i] = lb_total[i] == -tr[i];
        orig_u[i] = ub_total[i] == ub_step[i];
        tr_u[i] = ub_total[i] == tr[i];
    }
    let mut bound_hits = vec![0i8; n];
    if (0..n).all(|i| newton[i] >= lb_total[i] && newton[i] <= ub_total[i]) {
        return (newton.clone(), bound_hits, false);
    }

    let zero = DVector::zeros(n);
    let neg_g = -g;
    let (to_bounds, _) = step_size_to_bound(&zero, &neg_g, &lb_total, &ub_total);
    let t = minimize_quadratic_1d(a, b, 0.0, to_bounds);
    let cauchy = &neg_g * t;

    let diff = newton - &cauchy;
    let (size, hits) = step_size_to_bound(&cauchy, &diff, &lb_total, &ub_total);
    let mut tr_hit = false;
    for i in 0..n {
        if hits[i] < 0 && orig_l[i] {
            bound_hits[i] = -1;
        }
        if hits[i] > 0 && orig_u[i] {
            bound_hits[i] = 1;
        }
        if (hits[i] < 0 && tr_l[i]) || (hits[i] > 0 && tr_u[i]) {
            tr_hit = true;
        }
    }
    let size = if size.is_finite() { size.min(1.0) } else { 1.0 };
    (cauchy + diff * size, bound_hits, tr_hit)
}

/// Minimiser of `a·t² + b·t` on `[lo, hi]`.
fn minimize_quadratic_1d(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let f = |t: f64| a * t * t + b * t;
    let mut best = lo;
    let mut best_val = f(lo);
    if hi.is_finite() && f(hi) < best_val {
        best = hi;
        best_val = f(hi);
    }
    if a != 0.0 {
        let ext = -0.5 * b / a;
        if ext > lo && ext < hi && f(ext) < best_val {
            best = ext;
        }
    }
    best
}
