//! One sensor end to end: synthesise raw frames, normalise against dark and
//! uncoated references, smooth, and fit the thickness.

use filmarray::array::{fit_sensor, sensor_reflectance, PipelineConfig, SensorInput};
use filmarray::optics::FilmStack;
use filmarray::simkit::{run_rng, Geometry, NoiseSpec, Simulator};

fn main() -> filmarray::Result<()> {
    let truth = 286.0;
    let stack = FilmStack::sio2_on_si(truth)?;
    let sim = Simulator::with_defaults(stack.clone(), NoiseSpec::default())?;
    let config = PipelineConfig::new(stack);
    let channel = sim.layout().channel(4).expect("sensor 4").clone();

    let mut rng = run_rng(2024, 0);
    let frames = sim.synth_frames(channel.id, &Geometry::CALIBRATION, &mut rng)?;
    let input = SensorInput {
        session: config.session(&channel, frames.uncoated, frames.dark)?,
        coated: frames.coated,
    };

    let curve = sensor_reflectance(&channel, &input, &config)?;
    println!("{} valid pixels in the fit band", curve.valid_count());
    let fit = fit_sensor(&channel, &input, &config)?;
    println!(
        "d = {:.2} nm (truth {truth}), rmse {:.4}, r2 {:.4}, gate {}",
        fit.params.thickness_nm,
        fit.rmse,
        fit.r_squared,
        fit.gate.as_str()
    );
    Ok(())
}
