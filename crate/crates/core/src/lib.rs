// SPDX-License-Identifier: Apache-2.0

//! Evaluation and recalibration of regression uncertainty.
//!
//! A forecaster emits a Gaussian `N(mu, sigma^2)` per example. This crate
//! measures whether those sigmas track the errors actually made, using
//! sigma-sorted equal-count bins (RMV vs RMSE, ENCE, c_v), and recalibrates
//! them either by a single NLL-fitted scale factor or by the interval-based
//! isotonic recalibration of predicted CDFs.
//!
//! Module map:
//!
//! - [`forecast`]: records, validated sets, CSV/JSON loading
//! - [`cdf`]: Gaussian, Cauchy and recalibrated CDF forecasts
//! - [`metrics`]: binning, reliability diagram, ENCE, c_v, NLL
//! - [`scaling`]: STD scaling fitted by NLL minimisation
//! - [`interval`]: PIT, empirical CDF, PAVA, Romberg moment recovery, KS test
//! - [`synthetic`]: seeded scenario generators
//! - [`render`]: SVG views of reports

pub mod calibrator;
pub mod cdf;
pub mod cli;
pub mod error;
pub mod forecast;
pub mod interval;
pub mod metrics;
pub mod quadrature;
pub mod render;
pub mod rng;
pub mod scaling;
pub mod special;
pub mod synthetic;

pub use calibrator::{Calibrator, Method};
pub use cdf::{Cdf, CdfForecast, Interpolation, MonotoneMap};
pub use error::{Error, ErrorKind, Result};
pub use forecast::{ForecastRecord, ForecastSet};
pub use metrics::{evaluate, BinPartition, CalibrationReport, ReliabilityDiagram};
pub use scaling::ScalingCalibrator;

/// Version of the JSON schema written by reports and calibrators.
pub const SCHEMA_VERSION: u32 = 1;
