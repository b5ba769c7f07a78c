//! Spatial autocorrelation for areal compositional data.
//!
//! Compositions — vectors of parts carrying only relative information — live
//! on the simplex with Aitchison geometry. This crate measures whether
//! neighboring areal units hold similar compositions:
//!
//! - [`geometry`]: closure, perturbation, powering, the Aitchison inner
//!   product and norm, clr/ilr transforms, contrast matrices, centering, and
//!   multiplicative zero replacement.
//! - [`weights`]: sparse spatial weights from lattice contiguity (queen or
//!   rook) or edge lists, row standardization, and the scalar summaries the
//!   moment formulas consume.
//! - [`statistic`]: Reyes's I — the Moran-type statistic built from Aitchison
//!   inner products of centered compositions and their spatial lags — with
//!   its Cauchy–Schwarz upper bound and closed-form randomization moments,
//!   plus the componentwise Moran average baseline.
//! - [`inference`]: exact and Monte Carlo permutation distributions with a
//!   strict determinism contract, p-values, and empirical critical values.
//! - [`simulation`]: calibration and power studies over identical,
//!   independent, and spatially autoregressive compositional fields.
//! - [`validation`]: closed-form second moment checked against exact
//!   enumeration, emitted as a machine-readable report.
//! - [`io`]: CSV ingestion, analysis reports with input digests, and
//!   plot-ready series.
//!
//! The `reyes` binary exposes the same pipeline as subcommands; run with
//! `--help` or see the `examples/` directory for library usage.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod io;
pub mod numeric;
pub mod simulation;
pub mod statistic;
pub mod validation;
pub mod weights;

pub use error::{Error, Result};
