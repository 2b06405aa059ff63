//! Configuration loading, run execution and output writing for the `nhrel` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
pub mod surface;
pub mod sweep;

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use run::{execute, ExitKind, RunReport};
