use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::PixelCalibration;

pub const SENSOR_COUNT: usize = 7;
pub const DEFAULT_SPAN_MM: f64 = 74.0;

/// Zones of the array holder: A1/A2 watch left/right tilt, B and C rear and
/// front tilt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    A1,
    A2,
    B,
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorChannel {
    pub id: u8,
    pub zone: Zone,
    /// Lateral offset from the array centre, mm.
    pub offset_x_mm: f64,
    /// Longitudinal offset from the array centre, mm.
    pub offset_y_mm: f64,
    #[serde(default)]
    pub calibration: PixelCalibration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub channels: Vec<SensorChannel>,
    pub span_mm: f64,
}

fn default_zone(id: u8) -> Zone {
    match id {
        1 | 2 => Zone::A1,
        5 | 6 => Zone::A2,
        3 | 7 => Zone::B,
        _ => Zone::C,
    }
}

impl Default for ArrayLayout {
    /// Seven sensors evenly spaced across 74 mm in two staggered rows.
    fn default() -> Self {
        let pitch = DEFAULT_SPAN_MM / (SENSOR_COUNT - 1) as f64;
        let channels = (1..=SENSOR_COUNT as u8)
            .map(|id| SensorChannel {
                id,
                zone: default_zone(id),
                offset_x_mm: -DEFAULT_SPAN_MM / 2.0 + pitch * f64::from(id - 1),
                offset_y_mm: if id % 2 == 1 { 6.0 } else { -6.0 },
                calibration: PixelCalibration::default(),
            })
            .collect();
        Self {
            channels,
            span_mm: DEFAULT_SPAN_MM,
        }
    }
}

impl ArrayLayout {
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.channels {
            if !(1..=SENSOR_COUNT as u8).contains(&c.id) {
                return Err(Error::Config(format!("sensor id {} outside 1..=7", c.id)));
            }
            if !seen.insert(c.id) {
                return Err(Error::Config(format!("sensor id {} listed twice", c.id)));
            }
            c.calibration.wavelength_grid()?;
        }
        if self.channels.is_empty() {
            return Err(Error::Config("layout has no channels".into()));
        }
        if !(self.span_mm > 0.0) {
            return Err(Error::Config(format!("span {} mm must be positive", self.span_mm)));
        }
        Ok(())
    }

    pub fn channel(&self, id: u8) -> Option<&SensorChannel> {
        self.channels.iter().find(|c| c.id == id)
    }

    pub fn ids(&self) -> Vec<u8> {
        let mut ids: Vec<u8> = self.channels.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn zone_of(&self, id: u8) -> Option<Zone> {
        self.channel(id).map(|c| c.zone)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiltHypothesis {
    None,
    Left,
    Right,
    Front,
    Back,
    Indeterminate,
}

impl TiltHypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            TiltHypothesis::None => "none",
            TiltHypothesis::Left => "left",
            TiltHypothesis::Right => "right",
            TiltHypothesis::Front => "front",
            TiltHypothesis::Back => "back",
            TiltHypothesis::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltSignature {
    pub hypothesis: TiltHypothesis,
    /// Sensors expected to fail their gate under this tilt.
    pub sensors: BTreeSet<u8>,
}

/// Sensor zones plus the failure signature of each tilt direction. Signature
/// order breaks ties during classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneMap {
    pub zones: BTreeMap<u8, Zone>,
    pub signatures: Vec<TiltSignature>,
    /// Minimum Jaccard overlap between the failing set and a signature.
    #[serde(default = "default_min_overlap")]
    pub min_overlap: f64,
}

fn default_min_overlap() -> f64 {
    0.5
}

impl Default for ZoneMap {
    fn default() -> Self {
        let sig = |hypothesis, ids: &[u8]| TiltSignature {
            hypothesis,
            sensors: ids.iter().copied().collect(),
        };
        Self {
            zones: (1..=SENSOR_COUNT as u8).map(|id| (id, default_zone(id))).collect(),
            signatures: vec![
                sig(TiltHypothesis::Right, &[5, 6]),
                sig(TiltHypothesis::Left, &[1, 7]),
                sig(TiltHypothesis::Back, &[6, 7]),
                sig(TiltHypothesis::Front, &[1, 3, 4, 5, 6, 7]),
            ],
            min_overlap: default_min_overlap(),
        }
    }
}

impl ZoneMap {
    pub fn from_layout(layout: &ArrayLayout) -> Self {
        Self {
            zones: layout.channels.iter().map(|c| (c.id, c.zone)).collect(),
            ..Self::default()
        }
    }

    pub fn signature(&self, hypothesis: TiltHypothesis) -> Option<&BTreeSet<u8>> {
        self.signatures.iter().find(|s| s.hypothesis == hypothesis).map(|s| &s.sensors)
    }

    pub fn sensors_in(&self, zone: Zone) -> BTreeSet<u8> {
        self.zones.iter().filter(|(_, z)| **z == zone).map(|(id, _)| *id).collect()
    }
}

/// Maps the set of sensors with failing gates to a tilt direction.
///
/// The failing set is scored against every signature by Jaccard overlap; the
/// best score wins (earlier signatures on ties) if it reaches
/// `min_overlap`, otherwise the pattern is indeterminate.
pub fn classify_tilt(failing: &BTreeSet<u8>, zone_map: &ZoneMap) -> TiltHypothesis {
    if failing.is_empty() {
        return TiltHypothesis::None;
    }
    let mut best = (TiltHypothesis::Indeterminate, 0.0);
    for sig in &zone_map.signatures {
        let inter = failing.intersection(&sig.sensors).count() as f64;
        let union = failing.union(&sig.sensors).count() as f64;
        let score = inter / union;
        if score > best.1 {
            best = (sig.hypothesis, score);
        }
    }
    if best.1 >= zone_map.min_overlap {
        best.0
    } else {
        TiltHypothesis::Indeterminate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[u8]) -> BTreeSet<u8> {
        ids.iter().copied().collect()
    }

    #[test]
    fn default_layout_spans_74mm() {
        let l = ArrayLayout::default();
        l.validate().unwrap();
        assert_eq!(l.channels.len(), 7);
        let xs: Vec<f64> = l.channels.iter().map(|c| c.offset_x_mm).collect();
        assert!((xs[6] - xs[0] - 74.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut l = ArrayLayout::default();
        l.channels[1].id = 1;
        assert!(l.validate().is_err());
    }

    #[test]
    fn reported_failure_sets() {
        let z = ZoneMap::default();
        assert_eq!(classify_tilt(&set(&[]), &z), TiltHypothesis::None);
        assert_eq!(classify_tilt(&set(&[6]), &z), TiltHypothesis::Right);
        assert_eq!(classify_tilt(&set(&[5, 6]), &z), TiltHypothesis::Right);
        assert_eq!(classify_tilt(&set(&[1, 7]), &z), TiltHypothesis::Left);
        assert_eq!(classify_tilt(&set(&[6, 7]), &z), TiltHypothesis::Back);
        assert_eq!(classify_tilt(&set(&[1, 3, 4, 5, 6, 7]), &z), TiltHypothesis::Front);
        assert_eq!(classify_tilt(&set(&[2]), &z), TiltHypothesis::Indeterminate);
        assert_eq!(classify_tilt(&set(&[1, 2, 3, 4, 5, 6, 7]), &z), TiltHypothesis::Front);
    }

    #[test]
    fn zones_follow_layout() {
        let z = ZoneMap::from_layout(&ArrayLayout::default());
        assert_eq!(z.sensors_in(Zone::A2), set(&[5, 6]));
        assert_eq!(z.sensors_in(Zone::C), set(&[4]));
    }
}
