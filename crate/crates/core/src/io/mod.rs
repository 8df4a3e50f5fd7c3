//! File formats, configuration, sessions and the CLI commands.
//!
//! Everything on disk is CSV or JSON. Units are nm, degrees and mm
//! throughout, files included.

pub mod cli;
pub mod commands;
pub mod config;
pub mod files;
pub mod report;
pub mod session;

pub use cli::Cli;
pub use commands::{exit_code, run, Outcome};
pub use config::{LayoutFile, LoadedLayout, RunConfig, SweepSpec};
pub use report::OutputFormat;
pub use session::{simulate_session, SeedSource, SessionRecord};
