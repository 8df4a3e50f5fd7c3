//! A full seven-sensor reading at the calibration point and at a tilted pose:
//! per-sensor gates, the fused thickness and the tilt hypothesis.

use filmarray::array::PipelineConfig;
use filmarray::optics::FilmStack;
use filmarray::simkit::{run_rng, Geometry, NoiseSpec, Simulator, TiltAxis};

fn main() -> filmarray::Result<()> {
    let stack = FilmStack::sio2_on_si(300.0)?;
    let sim = Simulator::with_defaults(stack.clone(), NoiseSpec::default())?;
    let config = PipelineConfig::new(stack);
    let mut rng = run_rng(7, 0);
    let sessions = sim.calibrate(&config, &mut rng)?;

    let poses = [
        ("calibration point", Geometry::CALIBRATION),
        ("left 0.5 deg, 1 mm", Geometry::new(TiltAxis::Left, 0.5, -1.0)),
        ("front 0.5 deg, 1 mm", Geometry::new(TiltAxis::Front, 0.5, -1.0)),
    ];
    for (seq, (name, pose)) in poses.iter().enumerate() {
        let (m, report) = sim.measure(&sessions, pose, &config, seq as u64, &mut rng)?;
        println!("{name}");
        for s in &m.sensors {
            match &s.fit {
                Some(f) => println!(
                    "  sensor {}  {:7.2} nm  rmse {:.4}  r2 {:.3}  {}",
                    s.sensor_id,
                    f.params.thickness_nm,
                    f.rmse,
                    f.r_squared,
                    f.gate.as_str()
                ),
                None => println!("  sensor {}  {}", s.sensor_id, s.error.as_deref().unwrap_or("")),
            }
        }
        println!(
            "  fused {:.2} nm, tilt {}, {}\n",
            report.fused_thickness_nm.unwrap_or(f64::NAN),
            report.tilt.as_str(),
            report.verdict.as_str()
        );
    }
    Ok(())
}
