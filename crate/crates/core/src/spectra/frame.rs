use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ADC_MAX, PIXELS};
use crate::error::{Error, Result};
use crate::optics::csv_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Uncoated,
    Dark,
    Coated,
}

impl FrameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameKind::Uncoated => "uncoated",
            FrameKind::Dark => "dark",
            FrameKind::Coated => "coated",
        }
    }
}

/// One 256-pixel readout of a sensor, in raw ADC counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFrame {
    sensor_id: u8,
    counts: Vec<u16>,
    integration_time_us: f64,
    kind: FrameKind,
}

impl SpectrumFrame {
    pub fn new(sensor_id: u8, counts: Vec<u16>, integration_time_us: f64, kind: FrameKind) -> Result<Self> {
        if !(1..=7).contains(&sensor_id) {
            return Err(Error::InvalidFrame(format!("sensor id {sensor_id} outside 1..=7")));
        }
        if counts.len() != PIXELS {
            return Err(Error::InvalidFrame(format!("{} samples, expected {PIXELS}", counts.len())));
        }
        if let Some(p) = counts.iter().position(|&c| c > ADC_MAX) {
            return Err(Error::InvalidFrame(format!(
                "pixel {p} has {} counts, ADC maximum is {ADC_MAX}",
                counts[p]
            )));
        }
        if !(integration_time_us >= 0.0 && integration_time_us.is_finite()) {
            return Err(Error::InvalidFrame(format!("integration time {integration_time_us} µs")));
        }
        Ok(Self {
            sensor_id,
            counts,
            integration_time_us,
            kind,
        })
    }

    pub fn sensor_id(&self) -> u8 {
        self.sensor_id
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn integration_time_us(&self) -> f64 {
        self.integration_time_us
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn is_saturated(&self, pixel: usize) -> bool {
        self.counts[pixel] >= ADC_MAX
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(PIXELS * 8);
        out.push_str("pixel,counts\n");
        for (p, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{p},{c}\n"));
        }
        out
    }

    /// Parses the `pixel,counts` CSV; `source` is used in error messages only.
    pub fn from_csv<R: Read>(
        reader: R,
        source: &Path,
        sensor_id: u8,
        integration_time_us: f64,
        kind: FrameKind,
    ) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            pixel: usize,
            counts: u16,
        }
        let parse_err = |line: Option<u64>, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| csv_error(source, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["pixel", "counts"] {
            return Err(parse_err(Some(1), "expected header `pixel,counts`".into()));
        }
        let mut counts = Vec::with_capacity(PIXELS);
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| csv_error(source, e))?;
            let line = Some(i as u64 + 2);
            if row.pixel != i {
                return Err(parse_err(line, format!("expected pixel {i}, found {}", row.pixel)));
            }
            if row.counts > ADC_MAX {
                return Err(parse_err(line, format!("{} counts exceeds ADC maximum {ADC_MAX}", row.counts)));
            }
            counts.push(row.counts);
        }
        if counts.len() != PIXELS {
            return Err(parse_err(None, format!("{} rows, expected {PIXELS}", counts.len())));
        }
        Self::new(sensor_id, counts, integration_time_us, kind)
    }

    pub fn load(path: &Path, sensor_id: u8, integration_time_us: f64, kind: FrameKind) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(Error::file(path))?;
        Self::from_csv(file, path, sensor_id, integration_time_us, kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationReport {
    /// Fraction of pixels sitting at full scale.
    pub saturated_fraction: f64,
    /// `max(counts) / 1023`; LED and integration time are tuned toward 0.90.
    pub peak_fraction: f64,
}

pub fn saturation_report(frame: &SpectrumFrame) -> SaturationReport {
    let saturated = frame.counts.iter().filter(|&&c| c >= ADC_MAX).count();
    let peak = frame.counts.iter().copied().max().unwrap_or(0);
    SaturationReport {
        saturated_fraction: saturated as f64 / PIXELS as f64,
        peak_fraction: f64::from(peak) / f64::from(ADC_MAX),
    }
}
