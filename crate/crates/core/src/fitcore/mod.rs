//! Thickness estimation: bounded dogleg least squares against the optical
//! model, multistart seeding, and the RMSE / R² quality gate.

mod dogbox;
mod fit;
mod metrics;
mod params;
mod problem;

pub use dogbox::{dogbox, DogboxOptions, DogboxReport, LeastSquaresProblem, Termination};
pub use fit::{default_start_count, dogbox_fit, multistart_fit, start_thicknesses, FitOptions, FitResult};
pub use metrics::{quality_gate, r_squared, rmse, rmse_standard, Gate, GateThresholds, RmseKind};
pub use params::{Bounds, FitParams, PARAM_NAMES};
pub use problem::{FitProblem, MIN_VALID_PIXELS};
