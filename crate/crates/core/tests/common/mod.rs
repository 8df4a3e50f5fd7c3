//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use filmarray::optics::{FilmStack, ModelGrid, Polarization};
use num_complex::Complex64;

/// Abelès characteristic matrix of one layer between two semi-infinite
/// media, written for the N = n − ik convention with tilted admittances.
pub fn tmm_reflectance(stack: &FilmStack, lambda: f64, d: f64, theta0_deg: f64, pol: Polarization) -> f64 {
    let n0 = stack.ambient.refractive_index(lambda).unwrap();
    let n1 = stack.film.refractive_index(lambda).unwrap();
    let n2 = stack.substrate.refractive_index(lambda).unwrap();
    let s0 = n0 * theta0_deg.to_radians().sin();
    let cos_in = |n: Complex64| {
        let c = (Complex64::new(1.0, 0.0) - (s0 / n) * (s0 / n)).sqrt();
        // Decaying branch for N = n − ik: Im(N cos θ) ≤ 0.
        if (n * c).im > 0.0 {
            -c
        } else {
            c
        }
    };
    let admittance = |n: Complex64| {
        let c = cos_in(n);
        match pol {
            Polarization::S => n * c,
            Polarization::P => n / c,
        }
    };
    let (y0, y1, y2) = (admittance(n0), admittance(n1), admittance(n2));
    let delta = 2.0 * PI * d * n1 * cos_in(n1) / lambda;
    let i = Complex64::i();
    let (c, s) = (delta.cos(), delta.sin());
    let b = c + i * s / y1 * y2;
    let cc = i * y1 * s + c * y2;
    let r = (y0 * b - cc) / (y0 * b + cc);
    r.norm_sqr()
}

pub fn tmm_unpolarized(stack: &FilmStack, lambda: f64, d: f64, theta0_deg: f64) -> f64 {
    0.5 * (tmm_reflectance(stack, lambda, d, theta0_deg, Polarization::S)
        + tmm_reflectance(stack, lambda, d, theta0_deg, Polarization::P))
}

/// Thickness on a 0.01 nm grid over `[lo, hi]` with the least squared error.
pub fn grid_argmin(grid: &ModelGrid, y: &[f64], lo: f64, hi: f64) -> f64 {
    let mut model = vec![0.0; y.len()];
    let steps = ((hi - lo) / 0.01).round() as usize;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=steps {
        let d = lo + 0.01 * k as f64;
        grid.reflectance_into(d, &mut model);
        let sse: f64 = model.iter().zip(y).map(|(m, v)| (m - v) * (m - v)).sum();
        if sse < best.0 {
            best = (sse, d);
        }
    }
    best.1
}

/// The 450 to 700 nm fit band at the pixel density of the sensors.
pub fn band() -> Vec<f64> {
    (0..146).map(|i| 450.0 + 250.0 * i as f64 / 145.0).collect()
}
