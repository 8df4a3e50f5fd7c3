//! Scripted trajectories: calibration point, back and forth in height, and
//! the circular wobble that ends in a tilt fault.

use filmarray::array::PipelineConfig;
use filmarray::optics::FilmStack;
use filmarray::simkit::{run_trajectory, NoiseSpec, Sequence, Simulator};

fn main() -> filmarray::Result<()> {
    let per_step = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let stack = FilmStack::sio2_on_si(300.0)?;
    let sim = Simulator::with_defaults(stack.clone(), NoiseSpec::default())?;
    let config = PipelineConfig::new(stack);
    for seq in [Sequence::CalibPoint, Sequence::BackForth, Sequence::Circular] {
        let report = run_trajectory(&sim, seq, &config, 5, per_step)?;
        println!("{} ({} readings per step)", seq.as_str(), per_step);
        for s in &report.steps {
            let failing: Vec<String> = s.averaged.failing_sensors().iter().map(u8::to_string).collect();
            println!(
                "  {:<6} fused {:8.2} nm  err {:+6.2}%  sd {:5.2}  {:<7} tilt {:<5} failing [{}]",
                s.label,
                s.report.fused_thickness_nm.unwrap_or(f64::NAN),
                s.fused_error_pct.unwrap_or(f64::NAN),
                s.fused_std_nm,
                s.report.verdict.as_str(),
                s.report.tilt.as_str(),
                failing.join(" ")
            );
        }
    }
    Ok(())
}
