use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::session::SessionRecord;
use crate::array::{ArrayMeasurement, FusionReport, InspectionVerdict, SensorOutcome};
use crate::fitcore::FitResult;
use crate::simkit::DoeTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
}

pub const DOE_HEADER: &str = "axis,angle_deg,height_mm,sensor_id,rmse,r2,thickness_nm";
pub const SUMMARY_HEADER: &str = "axis,angle_deg,height_mm,verdict,failing_sensors,fused_thickness_nm";
pub const SESSION_HEADER: &str = "scenario,sequence,step,sensor,thickness_nm,rmse,r2,gate,tilt,alignment_required";
pub const FIT_HEADER: &str = "thickness_nm,index_scale,theta0_deg,rmse,r2,gate,iterations,termination,valid_pixels";

fn ids(set: impl IntoIterator<Item = u8>) -> String {
    set.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn render_fit(fit: &FitResult, format: OutputFormat) -> String {
    let p = &fit.params;
    match format {
        OutputFormat::Csv => format!(
            "{FIT_HEADER}\n{},{},{},{},{},{},{},{:?},{}\n",
            p.thickness_nm,
            p.index_scale,
            p.theta0_deg,
            fit.rmse,
            fit.r_squared,
            fit.gate.as_str(),
            fit.iterations,
            fit.termination,
            fit.valid_pixels
        ),
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "thickness     {:.2} nm", p.thickness_nm);
            if p.index_scale != 1.0 {
                let _ = writeln!(s, "index scale   {:.5}", p.index_scale);
            }
            if p.theta0_deg != 0.0 {
                let _ = writeln!(s, "incidence     {:.3} deg", p.theta0_deg);
            }
            let _ = writeln!(s, "rmse          {:.5}", fit.rmse);
            let _ = writeln!(s, "r2            {:.5}", fit.r_squared);
            let _ = writeln!(s, "gate          {}", fit.gate.as_str());
            let _ = writeln!(
                s,
                "solver        {} iterations, {:?}, {} pixels",
                fit.iterations, fit.termination, fit.valid_pixels
            );
            s
        }
    }
}

fn sensor_rows<'a>(
    measurements: impl Iterator<Item = (&'a str, &'a ArrayMeasurement)>,
) -> Vec<(u8, u64, &'a str, &'a SensorOutcome)> {
    let mut rows: Vec<_> = measurements
        .flat_map(|(step, m)| m.sensors.iter().map(move |s| (s.sensor_id, m.sequence, step, s)))
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    rows
}

fn fused_str(r: &FusionReport) -> String {
    r.fused_thickness_nm.map(|d| d.to_string()).unwrap_or_default()
}

/// Per-sensor rows (by sensor id, then sequence) followed by one fused row
/// per reading.
pub fn render_session(session: &SessionRecord, format: OutputFormat) -> String {
    let mut s = String::new();
    match format {
        OutputFormat::Csv => {
            let _ = writeln!(s, "{SESSION_HEADER}");
            for sc in &session.scenarios {
                let rows = sensor_rows(sc.measurements.iter().map(|m| (m.step.as_str(), &m.measurement)));
                for (id, seq, step, o) in rows {
                    let (d, rmse, r2) = match &o.fit {
                        Some(f) => (f.params.thickness_nm.to_string(), f.rmse.to_string(), f.r_squared.to_string()),
                        None => Default::default(),
                    };
                    let _ = writeln!(s, "{},{seq},{step},{id},{d},{rmse},{r2},{},,", sc.name, o.gate().as_str());
                }
                for m in &sc.measurements {
                    let r = &m.report;
                    let _ = writeln!(
                        s,
                        "{},{},{},fused,{},,,{},{},{}",
                        sc.name,
                        m.sequence,
                        m.step,
                        fused_str(r),
                        r.verdict.as_str(),
                        r.tilt.as_str(),
                        r.alignment_required
                    );
                }
            }
        }
        OutputFormat::Text => {
            let p = &session.provenance;
            let _ = writeln!(s, "{} {} seed {} ({})", p.tool, p.version, p.seed, p.seed_source.as_str());
            for sc in &session.scenarios {
                let _ = writeln!(s, "\nscenario {} (true thickness {} nm)", sc.name, sc.true_thickness_nm);
                let _ = writeln!(s, "  sensor  seq  step      thickness_nm      rmse        r2  gate");
                let rows = sensor_rows(sc.measurements.iter().map(|m| (m.step.as_str(), &m.measurement)));
                for (id, seq, step, o) in rows {
                    match &o.fit {
                        Some(f) => {
                            let _ = writeln!(
                                s,
                                "  {id:>6} {seq:>4}  {step:<8} {:>13.3} {:>9.5} {:>9.5}  {}",
                                f.params.thickness_nm,
                                f.rmse,
                                f.r_squared,
                                o.gate().as_str()
                            );
                        }
                        None => {
                            let _ = writeln!(
                                s,
                                "  {id:>6} {seq:>4}  {step:<8} error: {}",
                                o.error.as_deref().unwrap_or("no fit")
                            );
                        }
                    }
                }
                for m in &sc.measurements {
                    let r = &m.report;
                    let fused = r
                        .fused_thickness_nm
                        .map(|d| {
                            let err = (d - sc.true_thickness_nm) / sc.true_thickness_nm * 100.0;
                            format!("{d:.3} nm ({err:+.2}%)")
                        })
                        .unwrap_or_else(|| "none".into());
                    let _ = writeln!(
                        s,
                        "  fused seq {} {}: {fused}, tilt {}, {}",
                        m.sequence,
                        m.step,
                        r.tilt.as_str(),
                        r.verdict.as_str()
                    );
                    if r.alignment_required {
                        let _ = writeln!(
                            s,
                            "  alignment_required: sensors {} failing",
                            ids(m.measurement.failing_sensors())
                        );
                    }
                }
            }
        }
    }
    s
}

/// Averaged per-sensor rows of every cell, each cell closed by a `fused` row.
pub fn doe_csv(table: &DoeTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{DOE_HEADER}");
    for c in &table.cells {
        let key = format!("{},{},{}", c.axis.as_str(), c.angle_deg, c.height_mm);
        for r in &c.sensors {
            let _ = writeln!(s, "{key},{},{},{},{}", r.sensor_id, r.rmse, r.r2, r.thickness_nm);
        }
        let _ = writeln!(s, "{key},fused,{},{},{}", c.fused_rmse, c.fused_r2, c.fused_thickness_nm);
    }
    s
}

pub fn doe_summary(table: &DoeTable, format: OutputFormat) -> String {
    let mut s = String::new();
    let failing = |c: &crate::simkit::DoeCell| ids(c.sensors.iter().filter(|r| !r.gate.passed()).map(|r| r.sensor_id));
    match format {
        OutputFormat::Csv => {
            let _ = writeln!(s, "{SUMMARY_HEADER}");
            for c in &table.cells {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    c.axis.as_str(),
                    c.angle_deg,
                    c.height_mm,
                    c.verdict.as_str(),
                    failing(c),
                    c.fused_thickness_nm
                );
            }
        }
        OutputFormat::Text => {
            let _ = writeln!(
                s,
                "sample {} nm, seed {}, {} cells",
                table.sample_thickness_nm,
                table.seed,
                table.cells.len()
            );
            let _ = writeln!(s, "axis   angle  height  fused_nm    rmse      r2  verdict  failing");
            for c in &table.cells {
                let _ = writeln!(
                    s,
                    "{:<6} {:>5}  {:>4}mm  {:>8.2}  {:.4}  {:.4}  {:<7}  {}",
                    c.axis.as_str(),
                    c.angle_deg,
                    c.height_mm,
                    c.fused_thickness_nm,
                    c.fused_rmse,
                    c.fused_r2,
                    c.verdict.as_str(),
                    failing(c)
                );
            }
            let outside = table.cells.iter().filter(|c| c.verdict == InspectionVerdict::Outside).count();
            let _ = writeln!(s, "{} inside, {outside} outside", table.cells.len() - outside);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::{LoadedLayout, RunConfig};
    use crate::io::session::{simulate_session, SeedSource};
    use crate::simkit::{Geometry, Scenario, TiltAxis};

    fn session(dir: &std::path::Path) -> SessionRecord {
        let mut config = RunConfig::default();
        config.n_starts = Some(12);
        let tilted = Scenario {
            name: "tilted".into(),
            geometry: Geometry::new(TiltAxis::Right, 0.5, -1.0),
            trajectory: vec![Geometry::CALIBRATION, Geometry::new(TiltAxis::Right, 0.5, -1.0)],
            ..Scenario::default()
        };
        simulate_session(&[tilted], &LoadedLayout::default_layout(), None, &config, 9, SeedSource::Flag, dir).unwrap()
    }

    #[test]
    fn session_csv_is_ordered_by_sensor_then_sequence() {
        let dir = tempfile::tempdir().unwrap();
        let s = session(dir.path());
        let csv = render_session(&s, OutputFormat::Csv);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SESSION_HEADER));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 2 * 7 + 2);
        let keys: Vec<(u8, u64)> = rows[..14].iter().map(|r| (r[3].parse().unwrap(), r[1].parse().unwrap())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(rows[14..].iter().all(|r| r[3] == "fused"));
    }

    #[test]
    fn fused_row_is_the_mean_of_sensor_rows() {
        let dir = tempfile::tempdir().unwrap();
        let s = session(dir.path());
        let csv = render_session(&s, OutputFormat::Csv);
        for seq in ["0", "1"] {
            let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect::<Vec<_>>()).filter(|r| r[1] == seq).collect();
            let d: Vec<f64> = rows.iter().filter(|r| r[3] != "fused").map(|r| r[4].parse().unwrap()).collect();
            let fused: f64 = rows.iter().find(|r| r[3] == "fused").unwrap()[4].parse().unwrap();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            assert!((fused - mean).abs() <= 1e-9 * mean, "{fused} vs {mean}");
        }
    }

    #[test]
    fn alignment_line_only_when_required() {
        let dir = tempfile::tempdir().unwrap();
        let s = session(dir.path());
        let text = render_session(&s, OutputFormat::Text);
        assert_eq!(text.matches("alignment_required:").count(), 1);
        assert_eq!(text, render_session(&s, OutputFormat::Text));
    }
}
