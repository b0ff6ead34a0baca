//! Spatial-sign based white-noise testing for high-dimensional time series.
//!
//! The crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure computation:
//!
//! - [`matrix`]: the observation matrix, sign matrix and a small dense
//!   square-matrix type used by the data generators.
//! - [`sign`] and [`kernel`]: the spatial-sign transform, Gram matrices,
//!   lag-aligned pair sums and the trace estimators.
//! - [`stats_tests`]: the SS, FLM, PV, MAX and FC tests.
//! - [`dgp`]: innovation scenarios, VAR/VMA/VARMA models and the
//!   elliptical lag-one alternative.
//! - [`power`]: asymptotic power functions and relative efficiency.
//! - [`special`]: normal, chi-square, Gumbel and Kolmogorov distribution
//!   helpers.
//! - [`rng`]: reproducible per-replication random streams.
//!
//! File formats, the Monte Carlo engine and the CLI live in the `hdwn`
//! crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dgp;
pub mod error;
pub mod kernel;
pub mod matrix;
pub mod power;
pub mod rng;
pub mod sign;
pub mod special;

pub use error::{Error, Result};
pub use matrix::{Matrix, SeriesMatrix, SignMatrix};
pub use stats_tests::{LagWindow, PreparedSeries, TestKind, TestOutcome};
