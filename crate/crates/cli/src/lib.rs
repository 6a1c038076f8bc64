//! Command-line front end: configuration files, subcommands and result files.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::run;
pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};
