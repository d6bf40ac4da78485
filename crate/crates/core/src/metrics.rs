// SPDX-License-Identifier: Apache-2.0

//! Sigma-binned calibration diagnostics.
//!
//! Records are sorted by predicted sigma and cut into `N` contiguous,
//! equal-count bins. Per bin we compare the root mean predicted variance
//! (RMV) with the empirical RMSE; ENCE averages `|RMV - RMSE| / RMV` over
//! bins. `c_v` measures how dispersed the predicted sigmas are, which ENCE
//! alone cannot see (a constant sigma equal to the global RMSE scores a
//! perfect ENCE while carrying no per-example information).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastSet;
use crate::special::LN_2PI;
use crate::SCHEMA_VERSION;

/// Bins whose RMV falls below this fraction of the mean sigma trigger a warning.
const SMALL_RMV_RATIO: f64 = 1e-6;

/// Equal-count partition of record indices, in ascending-sigma order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinPartition {
    bins: Vec<Vec<usize>>,
}

impl BinPartition {
    pub fn bins(&self) -> &[Vec<usize>] {
        &self.bins
    }

    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bins.iter().map(Vec::len).collect()
    }
}

/// Default bin count: `min(15, floor(T / 50))`, at least 1.
pub fn default_n_bins(len: usize) -> usize {
    (len / 50).clamp(1, 15)
}

/// Sorts by `(sigma, original index)` and cuts into `n_bins` contiguous blocks.
/// When `n_bins` does not divide `T`, the lowest-sigma bins take one extra record each.
pub fn bin_by_sigma(set: &ForecastSet, n_bins: usize) -> Result<BinPartition> {
    let len = set.len();
    if n_bins == 0 || n_bins > len {
        return Err(Error::InvalidBinCount { n_bins, len });
    }
    let recs = set.records();
    let mut order: Vec<usize> = (0..len).collect();
    // stable: equal sigmas keep index order
    order.sort_by(|&a, &b| recs[a].sigma.total_cmp(&recs[b].sigma));

    let base = len / n_bins;
    let extra = len % n_bins;
    let mut bins = Vec::with_capacity(n_bins);
    let mut start = 0;
    for j in 0..n_bins {
        let size = base + usize::from(j < extra);
        bins.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(BinPartition { bins })
}

/// Root mean predicted variance over the records in `bin`.
pub fn rmv(bin: &[usize], set: &ForecastSet) -> Result<f64> {
    mean_over(bin, set, |r| r.sigma * r.sigma).map(f64::sqrt)
}

/// Root mean squared residual over the records in `bin`.
pub fn rmse(bin: &[usize], set: &ForecastSet) -> Result<f64> {
    mean_over(bin, set, |r| r.residual() * r.residual()).map(f64::sqrt)
}

fn mean_over(
    bin: &[usize],
    set: &ForecastSet,
    f: impl Fn(&crate::ForecastRecord) -> f64,
) -> Result<f64> {
    if bin.is_empty() {
        return Err(Error::EmptyBin);
    }
    let recs = set.records();
    let mut sum = 0.0;
    for &i in bin {
        let r = recs
            .get(i)
            .ok_or_else(|| Error::Usage(format!("index {i} out of range")))?;
        sum += f(r);
    }
    Ok(sum / bin.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    /// 1-based bin index, ascending in sigma.
    pub j: usize,
    pub count: usize,
    pub rmv: f64,
    pub rmse: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Per-bin RMSE against RMV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReliabilityDiagram {
    pub rows: Vec<BinRow>,
}

impl ReliabilityDiagram {
    pub fn from_partition(set: &ForecastSet, partition: &BinPartition) -> Result<Self> {
        let recs = set.records();
        let rows = partition
            .bins
            .par_iter()
            .enumerate()
            .map(|(j, bin)| {
                let (lo, hi) = bin.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(recs[i].sigma), hi.max(recs[i].sigma))
                });
                Ok(BinRow {
                    j: j + 1,
                    count: bin.len(),
                    rmv: rmv(bin, set)?,
                    rmse: rmse(bin, set)?,
                    sigma_min: lo,
                    sigma_max: hi,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReliabilityDiagram { rows })
    }

    pub fn total_count(&self) -> usize {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// Expected normalized calibration error: `mean_j |RMV_j - RMSE_j| / RMV_j`.
pub fn ence(diagram: &ReliabilityDiagram) -> Result<f64> {
    if diagram.rows.is_empty() {
        return Err(Error::EmptyBin);
    }
    let mut acc = 0.0;
    for row in &diagram.rows {
        if row.rmv.is_nan() || row.rmv <= 0.0 {
            return Err(Error::ZeroRmv { bin: row.j });
        }
        acc += (row.rmv - row.rmse).abs() / row.rmv;
    }
    Ok(acc / diagram.rows.len() as f64)
}

pub fn mean_sigma(set: &ForecastSet) -> f64 {
    set.sigmas().sum::<f64>() / set.len() as f64
}

/// Sample standard deviation of the sigmas (`T - 1` denominator) over their mean.
pub fn coefficient_of_variation(set: &ForecastSet) -> Result<f64> {
    let n = set.len();
    if n < 2 {
        return Err(Error::TooFewRecords { needed: 2, got: n });
    }
    let mean = mean_sigma(set);
    let ss: f64 = set.sigmas().map(|s| (s - mean) * (s - mean)).sum();
    Ok((ss / (n - 1) as f64).sqrt() / mean)
}

/// Per-record mean Gaussian negative log-likelihood (natural log).
pub fn mean_nll(set: &ForecastSet) -> f64 {
    let total: f64 = set
        .records()
        .iter()
        .map(|r| {
            let z = r.residual() / r.sigma;
            0.5 * LN_2PI + r.sigma.ln() + 0.5 * z * z
        })
        .sum();
    total / set.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub schema_version: u32,
    pub label: String,
    pub n_records: usize,
    pub ence: f64,
    pub cv: f64,
    pub mean_nll: f64,
    pub mean_sigma: f64,
    pub bins: ReliabilityDiagram,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CalibrationReport {
    /// ENCE recomputed from the stored bins.
    pub fn ence_from_bins(&self) -> Result<f64> {
        ence(&self.bins)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Full diagnostic summary: reliability diagram, ENCE, `c_v`, mean NLL, mean sigma.
pub fn evaluate(set: &ForecastSet, n_bins: usize) -> Result<CalibrationReport> {
    let partition = bin_by_sigma(set, n_bins)?;
    let diagram = ReliabilityDiagram::from_partition(set, &partition)?;
    let cv = coefficient_of_variation(set)?;
    let ence = ence(&diagram)?;
    let mean_sigma = mean_sigma(set);

    let warnings = diagram
        .rows
        .iter()
        .filter(|r| r.rmv < SMALL_RMV_RATIO * mean_sigma)
        .map(|r| {
            format!(
                "bin {} has RMV {:e}, far below the mean sigma {:e}; its normalized error dominates ENCE",
                r.j, r.rmv, mean_sigma
            )
        })
        .collect();

    Ok(CalibrationReport {
        schema_version: SCHEMA_VERSION,
        label: set.label().to_string(),
        n_records: set.len(),
        ence,
        cv,
        mean_nll: mean_nll(set),
        mean_sigma,
        bins: diagram,
        warnings,
    })
}
