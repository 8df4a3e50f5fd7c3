//! The closed-form single-film reflectance against an independent
//! characteristic-matrix (transfer-matrix) computation.

mod common;

use common::{tmm_reflectance, tmm_unpolarized};
use filmarray::optics::{model_reflectance, FilmStack, ModelGrid, Polarization, PolarizationMode};
use filmarray::spectra::PixelCalibration;

fn sensor_grid() -> Vec<f64> {
    PixelCalibration::default().wavelength_grid().unwrap()
}

#[test]
fn normal_incidence_matches_transfer_matrix() {
    let wl = sensor_grid();
    assert_eq!(wl.len(), 256);
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let d = 50.0 + 50.0 * k as f64;
        let stack = FilmStack::sio2_on_si(d).unwrap();
        for &l in &wl {
            let a = model_reflectance(&stack, l, PolarizationMode::Unpolarized).unwrap();
            worst = worst.max((a - tmm_unpolarized(&stack, l, d, 0.0)).abs());
        }
    }
    assert!(worst <= 1e-9, "max |ΔR| = {worst:e}");
}

#[test]
fn oblique_incidence_matches_per_polarization() {
    let wl = sensor_grid();
    for theta in [5.0, 30.0, 60.0] {
        let stack = FilmStack::sio2_on_si(237.0).unwrap().with_incidence(theta).unwrap();
        for &l in wl.iter().step_by(17) {
            for (mode, pol) in [(PolarizationMode::S, Polarization::S), (PolarizationMode::P, Polarization::P)] {
                let a = model_reflectance(&stack, l, mode).unwrap();
                let b = tmm_reflectance(&stack, l, 237.0, theta, pol);
                assert!((a - b).abs() <= 1e-9, "θ {theta}, λ {l}, {pol:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn grid_fast_path_agrees_with_direct_model() {
    let wl = sensor_grid();
    let template = FilmStack::sio2_on_si(100.0).unwrap();
    let grid = ModelGrid::new(&template, &wl, PolarizationMode::Unpolarized).unwrap();
    for d in [0.0, 12.5, 164.0, 286.0, 300.0, 999.0] {
        let fast = grid.reflectance(d);
        let stack = template.clone().with_thickness(d).unwrap();
        for (l, f) in wl.iter().zip(&fast) {
            let direct = model_reflectance(&stack, *l, PolarizationMode::Unpolarized).unwrap();
            assert!((direct - f).abs() <= 1e-12, "d {d}, λ {l}");
        }
    }
}

#[test]
fn zero_thickness_is_the_bare_substrate() {
    let stack = FilmStack::sio2_on_si(0.0).unwrap();
    for l in [450.0, 575.0, 700.0] {
        let r = model_reflectance(&stack, l, PolarizationMode::Unpolarized).unwrap();
        let bare = stack.bare_substrate_reflectance(l, PolarizationMode::Unpolarized).unwrap();
        assert!((r - bare).abs() < 1e-15);
        assert!((r - tmm_unpolarized(&stack, l, 0.0, 0.0)).abs() < 1e-12);
    }
}
