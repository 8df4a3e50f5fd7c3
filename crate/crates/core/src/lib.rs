//! Spectroscopic reflectometry for single-layer thin films.
//!
//! The crate covers the whole measurement chain of a seven-sensor
//! reflectometer array:
//!
//! - [`optics`]: single-film reflectance model over tabulated dispersion.
//! - [`spectra`]: pixel calibration, raw frames, dark/reference normalisation
//!   and boxcar smoothing.
//! - [`fitcore`]: bounded dogleg ("dogbox") thickness fits, multistart seeding,
//!   RMSE / R² and the per-sensor quality gate.
//! - [`array`]: sensor layout, per-sensor pipeline, simple-average fusion and
//!   tilt classification from the pattern of failing gates.
//! - [`simkit`]: synthetic frames, the static tilt/height sweep and scripted
//!   dynamic trajectories.
//! - [`io`]: file formats, run configuration, sessions and the command
//!   implementations behind the `filmarray` binary.

// `!(a < b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod array;
pub mod error;
pub mod fitcore;
pub mod io;
pub mod optics;
pub mod simkit;
pub mod spectra;

pub use error::{Error, Result};
