//! Command-line front end: model files, run configs, and the artifacts the
//! `lgsynth` binary writes.

pub mod commands;
pub mod config;
pub mod error;
pub mod model_file;
pub mod svg;

pub use commands::{run_config, run_evolve, run_model, run_simulate, EvolveOptions, EvolveSummary, SimulateOptions};
pub use config::{FilterConfig, FilterShape, IoConfig, Mode, RunConfig};
pub use error::CliError;
pub use model_file::{ModelFile, SimulationSettings};
