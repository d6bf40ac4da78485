// SPDX-License-Identifier: Apache-2.0

//! Interval-based (quantile) calibration of predictive CDFs.
//!
//! A forecaster is interval-calibrated when the PIT values `F_t(y_t)` are
//! uniform. Recalibration fits an isotonic map `R` through the empirical CDF
//! of the PIT values and replaces each `F_t` by `R ∘ F_t`. Because the
//! empirical CDF is already nondecreasing, the fit is exact on the
//! recalibration set: any sigma assignment whatsoever comes out "calibrated"
//! under this criterion. The sigma-binned metrics in [`crate::metrics`] do
//! not share that blind spot.

mod isotonic;
mod ks;
mod moments;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use isotonic::{fit_isotonic, pava};
pub use ks::{ks_uniformity, KsResult, KS_CRIT_05};
pub use moments::{
    moments_from_cdf, moments_with, Moments, MAX_WIDENINGS, TAIL_TOL, TRUNCATION_SCALES,
};

use crate::cdf::{Cdf, CdfForecast, Interpolation, MonotoneMap};
use crate::error::{Error, Result};
use crate::forecast::{ForecastRecord, ForecastSet};
use crate::SCHEMA_VERSION;

/// PIT values, one per record, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PitSample {
    values: Vec<f64>,
}

impl PitSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Malformed(format!(
                "PIT value {} at index {i} outside [0, 1]",
                values[i]
            )));
        }
        Ok(PitSample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `F_t(y_t)` under each record's Gaussian forecast.
pub fn pit(set: &ForecastSet) -> PitSample {
    let values = set
        .records()
        .par_iter()
        .map(|r| CdfForecast::gaussian(r.mu, r.sigma).cdf(r.y))
        .collect();
    PitSample { values }
}

/// `F_t(y_t)` for arbitrary CDF forecasts.
pub fn pit_of<F: Cdf + Sync>(forecasts: &[(F, f64)]) -> PitSample {
    let values = forecasts
        .par_iter()
        .map(|(f, y)| f.cdf(*y).clamp(0.0, 1.0))
        .collect();
    PitSample { values }
}

/// Points `(p_t, P̂(p_t))` with `P̂(p) = #{u : p_u <= p} / T`, sorted by `p_t`.
pub fn empirical_cdf(pit: &PitSample) -> Vec<(f64, f64)> {
    let mut v = pit.values.clone();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let level = (j + 1) as f64 / n;
        for _ in i..=j {
            out.push((v[i], level));
        }
        i = j + 1;
    }
    out
}

/// Isotonic map through the empirical PIT CDF of `recal`, anchored at
/// `(0, 0)` and `(1, 1)` so that `R ∘ F_t` is again a proper CDF.
pub fn recalibrate_interval(recal: &ForecastSet, interpolation: Interpolation) -> Result<MonotoneMap> {
    recalibrate_pit(&pit(recal), interpolation)
}

pub fn recalibrate_pit(pit: &PitSample, interpolation: Interpolation) -> Result<MonotoneMap> {
    if pit.len() < 2 {
        return Err(Error::TooFewRecords {
            needed: 2,
            got: pit.len(),
        });
    }
    let fitted = fit_isotonic(&empirical_cdf(pit), None, interpolation)?;
    let mut knots: Vec<(f64, f64)> = fitted.knots().collect();
    if knots[0].0 > 0.0 {
        knots.insert(0, (0.0, 0.0));
    }
    if knots[knots.len() - 1].0 < 1.0 {
        knots.push((1.0, 1.0));
    }
    MonotoneMap::new(knots, interpolation)
}

/// Confidence levels on which the interval calibration plot is evaluated.
pub fn plot_grid() -> Vec<f64> {
    (1..20).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub p: f64,
    pub p_hat: f64,
}

/// Observed coverage `p_hat` against nominal level `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCalibrationPlot {
    pub points: Vec<PlotPoint>,
    pub max_abs_deviation: f64,
}

impl IntervalCalibrationPlot {
    pub fn from_pit(pit: &PitSample) -> Self {
        let mut v = pit.values.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len().max(1) as f64;
        let points: Vec<PlotPoint> = plot_grid()
            .into_iter()
            .map(|p| PlotPoint {
                p,
                p_hat: v.partition_point(|&x| x <= p) as f64 / n,
            })
            .collect();
        let max_abs_deviation = points
            .iter()
            .map(|pt| (pt.p_hat - pt.p).abs())
            .fold(0.0, f64::max);
        IntervalCalibrationPlot {
            points,
            max_abs_deviation,
        }
    }
}

/// Coverage of `R ∘ F_t` on a held-out set.
pub fn calibration_plot(map: &MonotoneMap, holdout: &ForecastSet) -> IntervalCalibrationPlot {
    let values = pit(holdout)
        .values
        .into_iter()
        .map(|p| map.eval(p).clamp(0.0, 1.0))
        .collect();
    IntervalCalibrationPlot::from_pit(&PitSample { values })
}

/// A fitted interval recalibration map together with the moments of the
/// recalibrated standard normal `R ∘ Φ`.
///
/// For a Gaussian base, `R ∘ F_t(u) = (R ∘ Φ)((u - mu_t) / sigma_t)`, so the
/// recalibrated forecast has mean `mu_t + sigma_t * m` and standard deviation
/// `sigma_t * sqrt(v)` where `(m, v)` are the moments of `R ∘ Φ`. Those are
/// integrated once at fit time instead of once per record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCalibrator {
    pub schema_version: u32,
    pub n_fit: usize,
    pub map: Arc<MonotoneMap>,
    /// `None` when the moment integrals of `R ∘ Φ` did not converge.
    pub standardized: Option<Moments>,
}

/// Result of pushing a set through an interval recalibration.
#[derive(Debug, Clone)]
pub struct Recalibrated {
    /// Gaussian summary `N(mean, variance)` of each recalibrated CDF.
    pub set: ForecastSet,
    /// Indices of the input records that were kept.
    pub kept: Vec<usize>,
    /// Number of records whose moments could not be recovered.
    pub skipped: usize,
}

impl IntervalCalibrator {
    pub fn fit(recal: &ForecastSet, interpolation: Interpolation) -> Result<Self> {
        let map = Arc::new(recalibrate_interval(recal, interpolation)?);
        let standard = CdfForecast::recalibrated(CdfForecast::gaussian(0.0, 1.0), map.clone());
        let standardized = moments_from_cdf(&standard, 0.0, 1.0).ok();
        Ok(IntervalCalibrator {
            schema_version: SCHEMA_VERSION,
            n_fit: recal.len(),
            map,
            standardized,
        })
    }

    pub fn forecast(&self, r: &ForecastRecord) -> CdfForecast {
        CdfForecast::recalibrated(CdfForecast::gaussian(r.mu, r.sigma), self.map.clone())
    }

    /// Moments of one recalibrated record by direct integration of its CDF.
    pub fn record_moments(&self, r: &ForecastRecord) -> Result<Moments> {
        moments_from_cdf(&self.forecast(r), r.mu, r.sigma)
    }

    pub fn plot(&self, holdout: &ForecastSet) -> IntervalCalibrationPlot {
        calibration_plot(&self.map, holdout)
    }

    /// Replaces each forecast by the mean and standard deviation of its
    /// recalibrated CDF. Records whose moments are unavailable are skipped
    /// and counted; if none survive the call fails.
    pub fn apply(&self, set: &ForecastSet) -> Result<Recalibrated> {
        let Some(m) = self.standardized else {
            return Err(Error::MomentNonConvergence);
        };
        let sd = m.std();
        let mut records = Vec::with_capacity(set.len());
        let mut kept = Vec::with_capacity(set.len());
        for (i, r) in set.records().iter().enumerate() {
            let rec = ForecastRecord {
                mu: r.mu + r.sigma * m.mean,
                sigma: r.sigma * sd,
                y: r.y,
            };
            if rec.mu.is_finite() && rec.sigma.is_finite() && rec.sigma > 0.0 {
                records.push(rec);
                kept.push(i);
            }
        }
        let skipped = set.len() - records.len();
        if records.is_empty() {
            return Err(Error::MomentNonConvergence);
        }
        Ok(Recalibrated {
            set: ForecastSet::from_valid(records, set.label()),
            kept,
            skipped,
        })
    }
}
