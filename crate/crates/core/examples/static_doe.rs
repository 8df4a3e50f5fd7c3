//! The static tilt/height sweep. Pass the number of runs per cell as the
//! first argument (default 3); the full 30-run table takes a few minutes.

use filmarray::array::PipelineConfig;
use filmarray::io::report::{doe_summary, OutputFormat};
use filmarray::optics::FilmStack;
use filmarray::simkit::{run_doe, DoeGrid, NoiseSpec, Simulator};

fn main() -> filmarray::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let stack = FilmStack::sio2_on_si(300.0)?;
    let sim = Simulator::with_defaults(stack.clone(), NoiseSpec::default())?;
    let config = PipelineConfig::new(stack);
    let grid = DoeGrid {
        runs_per_cell: runs,
        ..DoeGrid::full()
    };
    let table = run_doe(&sim, &grid, &config, 1)?;
    print!("{}", doe_summary(&table, OutputFormat::Text));
    Ok(())
}
