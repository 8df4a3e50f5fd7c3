//! Synthetic experiments: LED and noise model, misalignment coupling, static
//! DOE sweeps, vendor-style comparisons and scripted trajectories.

mod comparison;
mod doe;
mod led;
mod scenario;
mod synth;
mod trajectory;

pub use comparison::{run_comparison, ComparisonRow, ComparisonSetup};
pub use doe::{
    run_doe, DoeCell, DoeGrid, DoeRow, DoeTable, SensorCellSummary, DEFAULT_RUNS_PER_CELL, DOE_ANGLES_DEG,
    DOE_HEIGHTS_MM,
};
pub use led::{led_peak_nm, led_spectrum, LED_BAND_NM};
pub use scenario::{
    CouplingModel, Geometry, NoiseSpec, SampleSpec, Scenario, TiltAxis, TiltSensitivity, CALIBRATION_HEIGHT_MM,
    HEIGHT_OFFSET_RANGE_MM, MAX_TILT_DEG,
};
pub use synth::{run_rng, Exposure, Simulator, SynthFrames};
pub use trajectory::{
    average_measurements, run_steps, run_trajectory, Sequence, StepReport, TrajectoryReport, TrajectoryStep,
    CIRCULAR_FAULT_STEP, MEASUREMENTS_PER_STEP,
};
