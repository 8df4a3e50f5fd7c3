use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::layout::{classify_tilt, TiltHypothesis, ZoneMap};
use crate::error::{Error, Result};
use crate::fitcore::{FitResult, Gate};

/// Outcome of one sensor's pipeline: a fit, or the reason there is none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorOutcome {
    pub sensor_id: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SensorOutcome {
    pub fn fitted(sensor_id: u8, fit: FitResult) -> Self {
        Self {
            sensor_id,
            fit: Some(fit),
            error: None,
        }
    }

    pub fn failed(sensor_id: u8, error: impl ToString) -> Self {
        Self {
            sensor_id,
            fit: None,
            error: Some(error.to_string()),
        }
    }

    /// A channel without a fit counts as failing.
    pub fn gate(&self) -> Gate {
        self.fit.as_ref().map_or(Gate::Fail, |f| f.gate)
    }

    pub fn thickness_nm(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.params.thickness_nm)
    }
}

/// One reading of the whole array, one outcome per channel in id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayMeasurement {
    pub sequence: u64,
    pub sensors: Vec<SensorOutcome>,
}

impl ArrayMeasurement {
    pub fn failing_sensors(&self) -> BTreeSet<u8> {
        self.sensors
            .iter()
            .filter(|s| s.gate() == Gate::Fail)
            .map(|s| s.sensor_id)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    /// Simple average over every sensor with a thickness.
    #[default]
    All,
    /// Simple average over sensors whose gate passed.
    Gated,
}

/// Simple average of per-sensor thickness estimates.
pub fn fuse(measurement: &ArrayMeasurement, mode: FusionMode) -> Result<f64> {
    let values: Vec<f64> = measurement
        .sensors
        .iter()
        .filter(|s| mode == FusionMode::All || s.gate() == Gate::Pass)
        .filter_map(SensorOutcome::thickness_nm)
        .collect();
    if values.is_empty() {
        return Err(match mode {
            FusionMode::All => Error::NoThickness,
            FusionMode::Gated => Error::NoPassingSensors,
        });
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InspectionVerdict {
    Inside,
    Outside,
}

impl InspectionVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            InspectionVerdict::Inside => "inside",
            InspectionVerdict::Outside => "outside",
        }
    }
}

/// Inside the inspection box iff every sensor passes its gate.
pub fn inspection_box_check(measurement: &ArrayMeasurement) -> InspectionVerdict {
    if measurement.sensors.iter().all(|s| s.gate() == Gate::Pass) {
        InspectionVerdict::Inside
    } else {
        InspectionVerdict::Outside
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorGate {
    pub sensor_id: u8,
    pub gate: Gate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionReport {
    /// Present whenever at least one sensor (one passing sensor in gated
    /// mode) produced a thickness, regardless of gate results.
    pub fused_thickness_nm: Option<f64>,
    pub mode: FusionMode,
    pub gates: Vec<SensorGate>,
    pub tilt: TiltHypothesis,
    pub verdict: InspectionVerdict,
    /// Set whenever any sensor fails its gate.
    pub alignment_required: bool,
}

impl FusionReport {
    pub fn build(measurement: &ArrayMeasurement, mode: FusionMode, zone_map: &ZoneMap) -> Self {
        let failing = measurement.failing_sensors();
        Self {
            fused_thickness_nm: fuse(measurement, mode).ok(),
            mode,
            gates: measurement
                .sensors
                .iter()
                .map(|s| SensorGate {
                    sensor_id: s.sensor_id,
                    gate: s.gate(),
                })
                .collect(),
            tilt: classify_tilt(&failing, zone_map),
            verdict: inspection_box_check(measurement),
            alignment_required: !failing.is_empty(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitcore::{FitParams, RmseKind, Termination};

    pub(crate) fn outcome(id: u8, d: f64, gate: Gate) -> SensorOutcome {
        SensorOutcome::fitted(
            id,
            FitResult {
                params: FitParams::new(d),
                rmse: if gate == Gate::Pass { 0.01 } else { 0.07 },
                rmse_kind: RmseKind::Standard,
                r_squared: if gate == Gate::Pass { 0.98 } else { 0.63 },
                iterations: 3,
                converged: true,
                termination: Termination::CostChange,
                gate,
                residual_norm: 0.1,
                valid_pixels: 140,
            },
        )
    }

    fn measurement(values: &[(f64, Gate)]) -> ArrayMeasurement {
        ArrayMeasurement {
            sequence: 0,
            sensors: values
                .iter()
                .enumerate()
                .map(|(i, &(d, g))| outcome(i as u8 + 1, d, g))
                .collect(),
        }
    }

    #[test]
    fn equal_readings_fuse_to_themselves() {
        let m = measurement(&[(300.0, Gate::Pass); 7]);
        assert_eq!(fuse(&m, FusionMode::All).unwrap(), 300.0);
        assert_eq!(inspection_box_check(&m), InspectionVerdict::Inside);
        let r = FusionReport::build(&m, FusionMode::All, &ZoneMap::default());
        assert!(!r.alignment_required);
        assert_eq!(r.tilt, TiltHypothesis::None);
    }

    #[test]
    fn outlier_skews_plain_average() {
        // Six sensors near the true 300 nm plus one failing sensor reading 368.26 nm.
        let mut v = vec![(300.0, Gate::Pass); 6];
        v.insert(5, (368.26, Gate::Fail));
        let m = measurement(&v);
        let all = fuse(&m, FusionMode::All).unwrap();
        let gated = fuse(&m, FusionMode::Gated).unwrap();
        assert!((all - (6.0 * 300.0 + 368.26) / 7.0).abs() < 1e-12);
        assert_eq!(gated, 300.0);
        let r = FusionReport::build(&m, FusionMode::All, &ZoneMap::default());
        assert!(r.alignment_required);
        assert_eq!(r.tilt, TiltHypothesis::Right);
        assert_eq!(r.verdict, InspectionVerdict::Outside);
        assert!(r.fused_thickness_nm.is_some());
    }

    #[test]
    fn mean_matching_reported_sequence_average() {
        // Seven readings averaging to 302.57 nm: 0.86 % above a 300 nm sample.
        let readings = [301.2, 303.9, 302.0, 302.57, 303.1, 302.4, 302.82];
        let m = measurement(&readings.map(|d| (d, Gate::Pass)));
        let fused = fuse(&m, FusionMode::All).unwrap();
        assert!((fused - 302.57).abs() < 1e-9);
        assert!(((fused - 300.0) / 300.0 * 100.0 - 0.86).abs() < 0.01);
    }

    #[test]
    fn gated_without_passing_sensor() {
        let m = measurement(&[(300.0, Gate::Fail); 7]);
        assert!(matches!(fuse(&m, FusionMode::Gated), Err(Error::NoPassingSensors)));
        let mut m = m;
        m.sensors = vec![SensorOutcome::failed(1, "saturated")];
        assert!(matches!(fuse(&m, FusionMode::All), Err(Error::NoThickness)));
        assert_eq!(m.sensors[0].gate(), Gate::Fail);
    }
}
