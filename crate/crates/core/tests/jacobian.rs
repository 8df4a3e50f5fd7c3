//! Forward-difference Jacobian of the fit residuals against central
//! differences at random interior points.

use filmarray::fitcore::{Bounds, FitParams, FitProblem};
use filmarray::optics::{model_curve, FilmStack};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn central(problem: &mut FitProblem, p: FitParams, i: usize) -> Vec<f64> {
    let x = p.to_array();
    let h = [1e-3, 1e-6, 1e-4][i];
    let (mut xp, mut xm) = (x, x);
    xp[i] += h;
    xm[i] -= h;
    let rp = problem.residuals(&FitParams::from_array(xp)).unwrap();
    let rm = problem.residuals(&FitParams::from_array(xm)).unwrap();
    rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

#[test]
fn forward_differences_agree_with_central() {
    let wl: Vec<f64> = (0..146).map(|i| 450.0 + 250.0 * i as f64 / 145.0).collect();
    let truth = FilmStack::sio2_on_si(300.0).unwrap();
    let curve = model_curve(&truth, &wl).unwrap();
    let bounds = Bounds::default().with_free_index_scale(1.0).with_free_theta(0.0);
    let mut problem = FitProblem::new(&curve, &truth, bounds).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let p = FitParams {
            thickness_nm: rng.gen_range(60.0..990.0),
            index_scale: rng.gen_range(0.985..1.015),
            theta0_deg: rng.gen_range(0.1..0.9),
        };
        let jac = problem.jacobian_fd(&p).unwrap();
        assert_eq!(jac.ncols(), 3);
        for i in 0..3 {
            let c = central(&mut problem, p, i);
            let num: f64 = jac.column(i).iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = c.iter().map(|b| b * b).sum::<f64>().sqrt();
            worst = worst.max(num / den);
        }
    }
    assert!(worst <= 1e-3, "worst relative column error {worst:e}");
}
