//! The `filmarray` binary: exit codes, determinism and file formats.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_filmarray"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Self { dir: tempfile::tempdir().unwrap() };
        f.write("config.json", r#"{"n_starts": 16}"#);
        f.write(
            "scenarios.json",
            r#"[
                {"name": "calib", "sample": {"name": "SAMPLE1", "thickness_nm": 300}},
                {"name": "right", "tilt_axis": "right", "tilt_deg": 0.5, "height_offset_mm": -1.0}
            ]"#,
        );
        f
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn p(&self, rel: &str) -> String {
        self.path(rel).to_str().unwrap().to_string()
    }

    fn write(&self, rel: &str, text: &str) {
        fs::write(self.path(rel), text).unwrap();
    }

    fn simulate(&self, out: &str, seed: Option<&str>) -> Output {
        let (scenario, config, out) = (self.p("scenarios.json"), self.p("config.json"), self.p(out));
        let mut args = vec!["simulate", "--scenario", &scenario, "--config", &config, "--out", &out];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        run(&args)
    }
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    files
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let f = Fixture::new();
    let a = f.simulate("a", Some("42"));
    let b = f.simulate("b", Some("42"));
    assert_eq!(code(&a), 2, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let (ta, tb) = (tree(&f.path("a")), tree(&f.path("b")));
    assert_eq!(ta.len(), 1 + 1 + 2 * 14 + 2 * 7);
    assert_eq!(ta, tb);
    let c = f.simulate("c", Some("43"));
    assert_ne!(tree(&f.path("c")), ta);
    assert_eq!(code(&c), 2);
}

#[test]
fn missing_seed_is_generated_and_recorded() {
    let f = Fixture::new();
    f.simulate("s", None);
    let session: serde_json::Value = serde_json::from_str(&fs::read_to_string(f.path("s/session.json")).unwrap()).unwrap();
    assert_eq!(session["provenance"]["seed_source"], "generated");
    let seed = session["provenance"]["seed"].as_u64().unwrap();
    assert_eq!(session["scenarios"][0]["scenario"]["seed"].as_u64(), Some(seed));

    // Replaying the recorded seed reproduces the fits.
    f.simulate("replay", Some(&seed.to_string()));
    let replay: serde_json::Value = serde_json::from_str(&fs::read_to_string(f.path("replay/session.json")).unwrap()).unwrap();
    assert_eq!(replay["scenarios"], session["scenarios"]);
}

#[test]
fn scenario_seed_is_used_without_the_flag() {
    let f = Fixture::new();
    f.write("one.json", r#"{"name": "seeded", "seed": 11}"#);
    let (s, o) = (f.p("one.json"), f.p("o"));
    assert_eq!(code(&run(&["simulate", "--scenario", &s, "--out", &o, "--config", &f.p("config.json")])), 0);
    let session = fs::read_to_string(f.path("o/session.json")).unwrap();
    assert!(session.contains(r#""seed_source": "scenario""#));
    assert!(session.contains(r#""seed": 11"#));
}

#[test]
fn report_is_idempotent_and_flags_alignment() {
    let f = Fixture::new();
    f.simulate("s", Some("5"));
    let s = f.p("s");
    let r1 = run(&["report", "--session", &s]);
    let r2 = run(&["report", "--session", &s]);
    assert_eq!(code(&r1), 2);
    assert_eq!(r1.stdout, r2.stdout);
    let text = String::from_utf8(r1.stdout).unwrap();
    assert!(text.contains("alignment_required: sensors 5 6 failing"), "{text}");

    let csv1 = run(&["report", "--session", &s, "--format", "csv"]);
    let csv2 = run(&["report", "--session", &format!("{s}/session.json"), "--format", "csv"]);
    assert_eq!(csv1.stdout, csv2.stdout);
    // Stored report written by simulate is the same text.
    assert_eq!(fs::read(f.path("s/report.txt")).unwrap(), text.as_bytes());
}

#[test]
fn report_fused_value_is_the_mean_of_its_rows() {
    let f = Fixture::new();
    f.simulate("s", Some("6"));
    let out = run(&["report", "--session", &f.p("s"), "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    for scenario in ["calib", "right"] {
        let d: Vec<f64> = rows
            .iter()
            .filter(|r| &r[0] == scenario && &r[3] != "fused")
            .map(|r| r[4].parse().unwrap())
            .collect();
        let fused: f64 = rows.iter().find(|r| &r[0] == scenario && &r[3] == "fused").unwrap()[4].parse().unwrap();
        assert_eq!(d.len(), 7);
        assert!((fused - d.iter().sum::<f64>() / 7.0).abs() < 1e-9);
    }
}

#[test]
fn fit_exit_codes_follow_the_gate() {
    let f = Fixture::new();
    f.simulate("s", Some("8"));
    let fit = |dir: &str, id: &str, swap: bool| {
        let coated = f.p(&format!("s/{dir}/seq0000_sensor{id}_coated.csv"));
        let mut dark = f.p(&format!("s/{dir}/sensor{id}_dark.csv"));
        let mut uncoated = f.p(&format!("s/{dir}/sensor{id}_uncoated.csv"));
        if swap {
            std::mem::swap(&mut dark, &mut uncoated);
        }
        let cfg = f.p("config.json");
        run(&["fit", "--coated", &coated, "--dark", &dark, "--uncoated", &uncoated, "--sensor-id", id, "--config", &cfg, "--format", "csv"])
    };
    let ok = fit("01_calib", "2", false);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let out = String::from_utf8(ok.stdout).unwrap();
    let d: f64 = out.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((d - 300.0).abs() < 6.0, "{d}");

    assert_eq!(code(&fit("02_right", "5", false)), 2);
    let swapped = fit("01_calib", "2", true);
    assert_eq!(code(&swapped), 1);
    assert!(String::from_utf8_lossy(&swapped.stderr).contains("valid pixels"));
}

#[test]
fn malformed_frame_reports_its_line() {
    let f = Fixture::new();
    f.simulate("s", Some("8"));
    let good = fs::read_to_string(f.path("s/01_calib/seq0000_sensor1_coated.csv")).unwrap();
    let bad = good.replacen("\n10,", "\n10,x", 1);
    f.write("bad.csv", &bad);
    let o = run(&[
        "fit",
        "--coated",
        &f.p("bad.csv"),
        "--dark",
        &f.p("s/01_calib/sensor1_dark.csv"),
        "--uncoated",
        &f.p("s/01_calib/sensor1_uncoated.csv"),
    ]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.csv:12"), "{err}");
}

#[test]
fn schema_errors_carry_the_field_path() {
    let f = Fixture::new();
    f.write("bad.json", r#"[{"name": "a"}, {"name": "b", "sample": {"thickness_nm": "thick"}}]"#);
    let o = run(&["simulate", "--scenario", &f.p("bad.json"), "--out", &f.p("o")]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[1].sample.thickness_nm"));

    f.write("cfg.json", r#"{"fit": {"gate": {"rmse_maximum": 0.02}}}"#);
    let o = run(&["report", "--session", &f.p("nope"), "--config", &f.p("cfg.json")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn three_sample_set_gives_three_fused_results() {
    let f = Fixture::new();
    f.write(
        "samples.json",
        r#"[{"name": "S1", "sample": {"name": "SAMPLE1", "thickness_nm": 300}},
            {"name": "S2", "sample": {"name": "SAMPLE2", "thickness_nm": 286}},
            {"name": "S3", "sample": {"name": "SAMPLE3", "thickness_nm": 164}}]"#,
    );
    let o = run(&["simulate", "--scenario", &f.p("samples.json"), "--out", &f.p("o"), "--seed", "3", "--config", &f.p("config.json"), "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let fused: Vec<f64> = csv
        .lines()
        .filter(|l| l.split(',').nth(3) == Some("fused"))
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(fused.len(), 3);
    for (got, truth) in fused.iter().zip([300.0, 286.0, 164.0]) {
        assert!((got - truth).abs() / truth < 0.02, "{got} vs {truth}");
    }
}

#[test]
fn sweep_single_cell_and_invalid_grid() {
    let f = Fixture::new();
    f.write("grid.json", r#"{"grid": {"rows": [{"axis": "left", "angle_deg": 0.5}], "heights_mm": [1.0]}}"#);
    let args = |grid: String, out: String| {
        vec!["sweep".to_string(), "--grid".into(), grid, "--runs".into(), "2".into(), "--seed".into(), "1".into(), "--out".into(), out, "--config".into(), f.p("config.json")]
    };
    let o = bin().args(args(f.p("grid.json"), f.p("o"))).output().unwrap();
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let doe = fs::read_to_string(f.path("o/doe.csv")).unwrap();
    assert_eq!(doe.lines().count(), 1 + 8);
    assert_eq!(doe.lines().next().unwrap(), "axis,angle_deg,height_mm,sensor_id,rmse,r2,thickness_nm");
    let summary = fs::read_to_string(f.path("o/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.contains("left,0.5,1,outside,1 7,"), "{summary}");

    f.write("bad.json", r#"{"grid": {"rows": [{"axis": "left", "angle_deg": 0.0}]}}"#);
    let o = bin().args(args(f.p("bad.json"), f.p("o2"))).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["report", "--session", "x", "--format", "yaml"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}
