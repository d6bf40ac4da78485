// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::PitSample;

/// Asymptotic one-sample KS critical coefficient at alpha = 0.05.
pub const KS_CRIT_05: f64 = 1.358;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub pass_at_05: bool,
}

/// One-sample Kolmogorov-Smirnov test of the PIT values against U(0, 1).
pub fn ks_uniformity(pit: &PitSample) -> Result<KsResult> {
    let n = pit.len();
    if n < 10 {
        return Err(Error::TooFewRecords { needed: 10, got: n });
    }
    let mut v = pit.values().to_vec();
    v.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = v
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let above = (i + 1) as f64 / nf - p;
            let below = p - i as f64 / nf;
            above.max(below)
        })
        .fold(0.0, f64::max);
    let critical = KS_CRIT_05 / nf.sqrt();
    Ok(KsResult {
        statistic,
        critical,
        pass_at_05: statistic < critical,
    })
}
