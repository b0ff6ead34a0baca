//! Monte Carlo harness, configuration files, CSV/JSON IO and the command-line
//! interface for the `hdwn-core` white-noise tests.
//!
//! - [`montecarlo`]: deterministic parallel size/power experiments.
//! - [`config`]: TOML experiment grids.
//! - [`csv_io`]: observation matrices in, result tables out.
//! - [`cli`]: the `hdwn` binary.

#![forbid(unsafe_code)]

pub mod cli;
pub mod config;
pub mod csv_io;
pub mod montecarlo;

pub use montecarlo::{run_experiment, McConfig, McError, McReport, Process};
