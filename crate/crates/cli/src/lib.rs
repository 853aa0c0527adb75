//! Command-line harness for the sum frequency generation simulator: `key=value` run
//! configurations, figure presets, CSV output with metadata sidecars.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use commands::{run, Report};
pub use config::{parse_config, render, Command, ConfigBuilder, ConfigError, Mode, Origin, RunConfig};
pub use error::CliError;
pub use presets::{preset, FigureId, FigurePreset};
