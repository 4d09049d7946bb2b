//! Experiment runner built on `cbdenoise-core`.
//!
//! Configuration files, CSV output, a thread-pool executor and the checks run
//! by the `cbdenoise` binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod matrix_io;
pub mod pool;

pub use error::{CliError, Result};
