//! Multistart dogbox fits against a brute-force 0.01 nm grid search on
//! noiseless curves.

use std::time::Instant;

use filmarray::fitcore::{multistart_fit, Bounds, FitOptions, FitParams};
use filmarray::optics::{FilmStack, ModelGrid, PolarizationMode, ReflectanceCurve};

fn main() -> filmarray::Result<()> {
    let wl: Vec<f64> = (0..146).map(|i| 450.0 + 250.0 * f64::from(i) / 145.0).collect();
    let template = FilmStack::sio2_on_si(100.0)?;
    let grid = ModelGrid::new(&template, &wl, PolarizationMode::Unpolarized)?;
    let bounds = Bounds::default();
    let opts = FitOptions::default();

    println!("truth_nm,dogbox_nm,grid_nm,diff_nm,dogbox_ms");
    for truth in [112.3, 164.0, 201.7, 286.0, 300.0, 347.9, 399.1] {
        let y = grid.reflectance(truth);
        let curve = ReflectanceCurve::from_values(&wl, &y)?;

        let t = Instant::now();
        let fit = multistart_fit(&curve, &template, FitParams::new(0.0), bounds, 38, &opts)?;
        let ms = t.elapsed().as_secs_f64() * 1e3;

        let mut best = (f64::INFINITY, 0.0);
        let mut model = vec![0.0; wl.len()];
        for k in 0..=95_000 {
            let d = 50.0 + 0.01 * f64::from(k);
            grid.reflectance_into(d, &mut model);
            let sse: f64 = model.iter().zip(&y).map(|(m, v)| (m - v).powi(2)).sum();
            if sse < best.0 {
                best = (sse, d);
            }
        }
        let d = fit.params.thickness_nm;
        println!("{truth},{d:.4},{:.2},{:.4},{ms:.1}", best.1, d - best.1);
    }
    Ok(())
}
