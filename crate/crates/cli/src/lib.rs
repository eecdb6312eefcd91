//! Command-line front end: configuration, manifests and experiment drivers.

pub mod app;
pub mod config;
pub mod experiments;
pub mod manifest;

pub use app::{dispatch, run, EXIT_FAIL, EXIT_PASS, EXIT_USAGE, SUBCOMMANDS};
pub use config::{parse_config, parse_str, Config, ConfigError, Preset};
pub use manifest::RunManifest;
