//! Library side of the `confel` binary: config parsing and the three
//! commands, each producing an [`commands::Outcome`] without touching the
//! filesystem.

pub mod commands;
pub mod config;

pub use commands::{Options, Outcome};
pub use config::{ConfigError, ProblemConfig};
