//! Command-line driver for blended-gas pipeline runs: scenario loading, CSV/JSON export,
//! envelope certification and drift-flux comparison.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod scenario;

pub use commands::{cmd_certify, cmd_compare, cmd_run, cmd_stationary};
pub use error::{CliError, Result};
pub use scenario::ScenarioFile;
