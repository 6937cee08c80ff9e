//! Configuration, orchestration and file output for the `trm` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_chi_range, cmd_run, cmd_sweep, cmd_verify, simulate, CliError, RunOutcome};
pub use config::{config_hash, parse_config, to_toml, RunManifest};
