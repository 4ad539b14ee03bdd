//! Library surface of the `pursuit` CLI: configuration loading, scenario
//! presets, the subcommand implementations, and the CSV/SVG emitters.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

pub use config::{load_config, parse_config, preset, RunConfig};
