//! Command-line front end: configuration parsing, subcommand dispatch and
//! CSV emission for the amplifier toolkit.

mod commands;
mod config;
mod figures;

pub use commands::{run, Cli, CliError, Command, SignalKind};
pub use config::{
    build_run_config, parse_config, parse_config_file, serialize_config, ConfigFile, RunConfig,
    ScanSettings, DEFAULT_CONFIG,
};
pub use figures::RECIPES;
