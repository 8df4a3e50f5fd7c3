//! Property-based invariants across modules.

use std::collections::BTreeSet;
use std::path::Path;

use filmarray::array::{classify_tilt, fuse, ArrayMeasurement, FusionMode, SensorOutcome, TiltHypothesis, ZoneMap};
use filmarray::fitcore::{r_squared, rmse, rmse_standard, FitParams, FitResult, Gate, GateThresholds, RmseKind, Termination};
use filmarray::io::config::RunConfig;
use filmarray::io::files::{parse_json, to_json};
use filmarray::optics::{model_reflectance, FilmStack, MaterialDispersion, PolarizationMode};
use filmarray::simkit::{CouplingModel, Geometry, Scenario, TiltAxis};
use filmarray::spectra::{boxcar, FrameKind, PixelCalibration, SpectrumFrame};
use proptest::prelude::*;

fn outcome(id: u8, d: f64, pass: bool) -> SensorOutcome {
    let gate = if pass { Gate::Pass } else { Gate::Fail };
    SensorOutcome::fitted(
        id,
        FitResult {
            params: FitParams::new(d),
            rmse: if pass { 0.01 } else { 0.05 },
            rmse_kind: RmseKind::Standard,
            r_squared: if pass { 0.97 } else { 0.4 },
            iterations: 4,
            converged: true,
            termination: Termination::Gradient,
            gate,
            residual_norm: 0.1,
            valid_pixels: 145,
        },
    )
}

fn measurement(values: &[(f64, bool)]) -> ArrayMeasurement {
    ArrayMeasurement {
        sequence: 0,
        sensors: values.iter().enumerate().map(|(i, &(d, p))| outcome(i as u8 + 1, d, p)).collect(),
    }
}

proptest! {
    #[test]
    fn fused_mean_lies_within_sensor_range(values in prop::collection::vec((50.0..1000.0_f64, any::<bool>()), 1..=7)) {
        let m = measurement(&values);
        let fused = fuse(&m, FusionMode::All).unwrap();
        let lo = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        let hi = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(fused >= lo - 1e-9 && fused <= hi + 1e-9);
        match fuse(&m, FusionMode::Gated) {
            Ok(g) => prop_assert!(values.iter().any(|v| v.1) && g >= lo - 1e-9 && g <= hi + 1e-9),
            Err(_) => prop_assert!(values.iter().all(|v| !v.1)),
        }
    }

    #[test]
    fn fusion_ignores_sensor_order(values in prop::collection::vec((50.0..1000.0_f64, any::<bool>()), 2..=7), rot in 0usize..7) {
        let a = measurement(&values);
        let mut b = a.clone();
        let k = rot % b.sensors.len();
        b.sensors.rotate_left(k);
        let (fa, fb) = (fuse(&a, FusionMode::All).unwrap(), fuse(&b, FusionMode::All).unwrap());
        prop_assert!((fa - fb).abs() <= 1e-9 * fa);
        prop_assert_eq!(a.failing_sensors(), b.failing_sensors());
    }

    #[test]
    fn classification_depends_only_on_the_failing_set(ids in prop::collection::btree_set(1u8..=7, 0..=7)) {
        let z = ZoneMap::default();
        let h = classify_tilt(&ids, &z);
        prop_assert_eq!(h == TiltHypothesis::None, ids.is_empty());
        if let Some(sig) = [TiltHypothesis::Right, TiltHypothesis::Left, TiltHypothesis::Back, TiltHypothesis::Front]
            .into_iter()
            .find(|t| z.signature(*t) == Some(&ids))
        {
            prop_assert_eq!(h, sig);
        }
    }

    #[test]
    fn reflectance_is_a_fraction(d in 0.0..2000.0_f64, lambda in 440.0..710.0_f64, theta in 0.0..80.0_f64) {
        let stack = FilmStack::sio2_on_si(d).unwrap().with_incidence(theta).unwrap();
        for mode in [PolarizationMode::S, PolarizationMode::P, PolarizationMode::Unpolarized] {
            let r = model_reflectance(&stack, lambda, mode).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn lossless_film_period(d in 10.0..500.0_f64, lambda in 450.0..700.0_f64) {
        // A non-absorbing film repeats every λ/(2n) at normal incidence.
        let stack = FilmStack::sio2_on_si(d).unwrap();
        let n = stack.film_index(lambda).unwrap().re;
        let shifted = stack.clone().with_thickness(d + lambda / (2.0 * n)).unwrap();
        let a = model_reflectance(&stack, lambda, PolarizationMode::Unpolarized).unwrap();
        let b = model_reflectance(&shifted, lambda, PolarizationMode::Unpolarized).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn metric_identities(y in prop::collection::vec(0.0..1.0_f64, 3..64), c in -0.2..0.2_f64) {
        prop_assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        prop_assert!((rmse_standard(&y, &shifted).unwrap() - c.abs()).abs() < 1e-12);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        if y.iter().any(|v| (v - mean).abs() > 1e-9) {
            prop_assert!((r_squared(&y, &y).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!(r_squared(&y, &vec![mean; y.len()]).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn gate_is_monotone(r1 in 0.0..0.1_f64, r2 in 0.0..0.1_f64, q1 in 0.0..1.0_f64, q2 in 0.0..1.0_f64) {
        let g = GateThresholds::default();
        // A fit that is better on both metrics never gates worse.
        let (best_rmse, worst_rmse) = (r1.min(r2), r1.max(r2));
        let (best_r2, worst_r2) = (q1.max(q2), q1.min(q2));
        if g.evaluate(worst_rmse, worst_r2).passed() {
            prop_assert!(g.evaluate(best_rmse, best_r2).passed());
        }
    }

    #[test]
    fn boxcar_preserves_constants_and_length(v in 0.0..1.0_f64, n in 1usize..80, half in 0usize..15) {
        let w = 2 * half + 1;
        let s = boxcar(&vec![v; n], w).unwrap();
        prop_assert_eq!(s.len(), n);
        prop_assert!(s.iter().all(|x| (x - v).abs() < 1e-12));
    }

    #[test]
    fn boxcar_stays_within_input_range(values in prop::collection::vec(-1.0..1.0_f64, 1..80), half in 0usize..15) {
        let s = boxcar(&values, 2 * half + 1).unwrap();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s.iter().all(|x| *x >= lo - 1e-12 && *x <= hi + 1e-12));
    }

    #[test]
    fn frame_csv_round_trip(counts in prop::collection::vec(0u16..=1023, 256), id in 1u8..=7) {
        let f = SpectrumFrame::new(id, counts, 1000.0, FrameKind::Coated).unwrap();
        let text = f.to_csv_string();
        let back = SpectrumFrame::from_csv(text.as_bytes(), Path::new("f.csv"), id, 1000.0, FrameKind::Coated).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn calibration_json_round_trip(a0 in 300.0..400.0_f64, b1 in 1.0..2.0_f64, b2 in -1e-4..1e-4_f64) {
        let cal = PixelCalibration::new(a0, [b1, b2, 0.0, 0.0, 0.0]).unwrap();
        let back: PixelCalibration = parse_json(&to_json(&cal).unwrap(), Path::new("c.json")).unwrap();
        prop_assert_eq!(back, cal);
    }

    #[test]
    fn dispersion_csv_round_trip(n in 1.0..4.0_f64, k in 0.0..1.0_f64) {
        let m = MaterialDispersion::constant("x", n, k, (300.0, 1000.0)).unwrap();
        let back = MaterialDispersion::from_csv_str("x", &m.to_csv_string()).unwrap();
        prop_assert_eq!(back.samples(), m.samples());
    }

    #[test]
    fn coupling_is_neutral_at_the_calibration_point(id in 1u8..=7, lambda in 450.0..700.0_f64) {
        let c = CouplingModel::default();
        prop_assert_eq!(c.coupling(id, &Geometry::CALIBRATION), 1.0);
        prop_assert_eq!(c.skew(id, lambda, &Geometry::CALIBRATION), 0.0);
    }

    #[test]
    fn coupling_never_amplifies(id in 1u8..=7, axis in 0usize..4, tilt in 0.0..1.0_f64, dh in -1.0..2.0_f64) {
        let axis = [TiltAxis::Left, TiltAxis::Right, TiltAxis::Front, TiltAxis::Back][axis];
        let c = CouplingModel::default().coupling(id, &Geometry::new(axis, tilt, dh));
        prop_assert!(c > 0.0 && c <= 1.0);
    }

    #[test]
    fn scenario_json_round_trip(tilt in 0.0..1.0_f64, dh in -1.0..2.0_f64, seed in any::<u32>(), d in 50.0..900.0_f64) {
        let mut s = Scenario { geometry: Geometry::new(TiltAxis::Back, tilt, dh), ..Scenario::default() };
        s.seed = Some(u64::from(seed));
        s.sample.thickness_nm = d;
        let back: Scenario = parse_json(&to_json(&s).unwrap(), Path::new("s.json")).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn run_config_round_trip() {
    let c = RunConfig::default();
    let back: RunConfig = parse_json(&to_json(&c).unwrap(), Path::new("c.json")).unwrap();
    assert_eq!(back, c);
}

#[test]
fn empty_failing_set_is_level() {
    assert_eq!(classify_tilt(&BTreeSet::new(), &ZoneMap::default()), TiltHypothesis::None);
}
