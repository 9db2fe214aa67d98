//! Orchestration layer for the wildfire risk pipeline: run configuration,
//! the parallel scenario sweep, and the result writers behind the `gridfire`
//! command-line interface.

pub mod config;
pub mod pipeline;

pub use config::{Overrides, RunConfig};
pub use pipeline::CliError;
