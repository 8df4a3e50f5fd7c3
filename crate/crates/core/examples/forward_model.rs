//! Reflectance of SiO2 on Si for a few film thicknesses, sampled across the
//! LED band. Prints a CSV table to stdout.

use filmarray::optics::{model_reflectance, FilmStack, PolarizationMode};

fn main() -> filmarray::Result<()> {
    let thicknesses = [100.0, 164.0, 286.0, 300.0, 500.0];
    print!("wavelength_nm");
    for d in thicknesses {
        print!(",R_{d}nm");
    }
    println!();
    let stacks = thicknesses
        .iter()
        .map(|&d| FilmStack::sio2_on_si(d))
        .collect::<filmarray::Result<Vec<_>>>()?;
    for lambda in (450..=700).step_by(10).map(f64::from) {
        print!("{lambda}");
        for s in &stacks {
            print!(",{:.6}", model_reflectance(s, lambda, PolarizationMode::Unpolarized)?);
        }
        println!();
    }
    Ok(())
}
