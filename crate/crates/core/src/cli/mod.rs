//! Configuration, orchestration and table output behind the `antipt`
//! binary.
//!
//! ```text
//! antipt <eigen|spectra|discord-sweep|eit|phase|micro> --config cfg.json [--out dir] [--seed N]
//! ```
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or parameter
//! error, 3 numeric failure.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, run_config, CommandOutput, COMMANDS};
pub use config::{Format, MicroSection, MonteCarloSection, OutputSpec, ParamsSection, RunConfig, SpectrumSpec, SweepSpec};
pub use output::Table;
