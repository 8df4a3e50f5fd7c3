//! Calibration-point accuracy on three samples, as in a comparison against a
//! commercial single-spot reflectometer.

use filmarray::array::{ArrayLayout, PipelineConfig};
use filmarray::simkit::{run_comparison, ComparisonSetup, CouplingModel, Exposure, NoiseSpec, SampleSpec};

fn main() -> filmarray::Result<()> {
    let layout = ArrayLayout::default();
    let coupling = CouplingModel::default();
    let setup = ComparisonSetup {
        layout: &layout,
        coupling: &coupling,
        noise: NoiseSpec::default(),
        exposure: Exposure::default(),
        runs: 30,
        seed: 42,
    };
    let rows = run_comparison(&SampleSpec::comparison_set(), &setup, |s| Ok(PipelineConfig::new(s.stack()?)))?;
    println!("sample,true_nm,fused_mean_nm,fused_sd_nm,error_pct,within_2pct");
    for r in rows {
        println!(
            "{},{},{:.2},{:.2},{:+.3},{:.2}",
            r.sample, r.true_thickness_nm, r.fused_mean_nm, r.fused_std_nm, r.error_pct, r.within_2pct
        );
    }
    Ok(())
}
