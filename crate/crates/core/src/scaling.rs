// SPDX-License-Identifier: Apache-2.0

//! STD scaling: one multiplicative factor on every predicted sigma.
//!
//! Under `N(mu, (s*sigma)^2)` the mean NLL over a set is, up to constants,
//! `ln s + m / (2 s^2)` with `m = mean((y - mu)^2 / sigma^2)`. Its unique
//! stationary point `s = sqrt(m)` is the global minimum, so the fit is closed
//! form. Means are never touched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastSet;
use crate::metrics::mean_nll;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCalibrator {
    pub schema_version: u32,
    pub s: f64,
    pub nll_before: f64,
    pub nll_after: f64,
    pub n_fit: usize,
}

impl ScalingCalibrator {
    /// Calibrator with a given factor and no fit diagnostics.
    pub fn with_factor(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Usage(format!("scaling factor must be positive and finite, got {s}")));
        }
        Ok(ScalingCalibrator {
            schema_version: SCHEMA_VERSION,
            s,
            nll_before: f64::NAN,
            nll_after: f64::NAN,
            n_fit: 0,
        })
    }

    pub fn apply(&self, set: &ForecastSet) -> Result<ForecastSet> {
        apply_scaling(self, set)
    }
}

/// Closed-form NLL-optimal scale factor for `recal`.
pub fn optimal_factor(recal: &ForecastSet) -> Result<f64> {
    let n = recal.len();
    if n < 2 {
        return Err(Error::TooFewRecords { needed: 2, got: n });
    }
    let z2: Vec<f64> = recal
        .records()
        .iter()
        .map(|r| {
            let z = r.residual() / r.sigma;
            z * z
        })
        .collect();
    let m = pairwise_sum(&z2) / n as f64;
    if m == 0.0 {
        return Err(Error::DegenerateResiduals);
    }
    let s = m.sqrt();
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::DegenerateResiduals);
    }
    Ok(s)
}

pub fn fit_std_scaling(recal: &ForecastSet) -> Result<ScalingCalibrator> {
    let s = optimal_factor(recal)?;
    let nll_before = mean_nll(recal);
    let nll_after = mean_nll(&recal.map_sigma(|x| x * s)?);
    Ok(ScalingCalibrator {
        schema_version: SCHEMA_VERSION,
        s,
        nll_before,
        nll_after,
        n_fit: recal.len(),
    })
}

/// Multiplies every sigma by `cal.s`; mu and y are copied bit for bit.
pub fn apply_scaling(cal: &ScalingCalibrator, set: &ForecastSet) -> Result<ForecastSet> {
    let s = cal.s;
    set.map_sigma(|x| x * s)
}

const PAIRWISE_LEAF: usize = 1024;

/// Fixed-shape pairwise summation; the tree depends only on the length, so
/// the result is the same under any thread schedule.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    let (sa, sb) = rayon::join(|| pairwise_sum(a), || pairwise_sum(b));
    sa + sb
}
