// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic forecasters.
//!
//! Inputs `x_t ~ U[0.1, 1]`, targets `y_t ~ N(x_t, x_t^2)`, and the forecast
//! mean is the true conditional mean `x_t`. Scenarios differ only in the
//! predicted sigma. Every record draws `(x, z, sigma_random)` from its own
//! stream in that order, so all scenarios sharing a seed share `x` and `y`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{ForecastRecord, ForecastSet};
use crate::interval::PitSample;
use crate::rng::Stream;

pub const X_RANGE: (f64, f64) = (0.1, 1.0);
pub const RANDOM_SIGMA_RANGE: (f64, f64) = (1.0, 10.0);
/// Size of the recalibration split used by the synthetic experiments.
pub const RECAL_SIZE: usize = 6_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// sigma = true std `x_t`.
    OracleUncertainty,
    /// sigma ~ U[1, 10], independent of everything else.
    RandomUncertainty,
    /// sigma = `x_t / factor`.
    OverconfidentByFactor { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub kind: ScenarioKind,
    pub n: usize,
    pub seed: u64,
}

impl SyntheticScenario {
    pub fn new(kind: ScenarioKind, n: usize, seed: u64) -> Self {
        SyntheticScenario { kind, n, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyInput);
        }
        if let ScenarioKind::OverconfidentByFactor { factor } = self.kind {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(Error::Usage(format!(
                    "overconfidence factor must be positive, got {factor}"
                )));
            }
        }
        Ok(())
    }

    fn label(&self) -> &'static str {
        match self.kind {
            ScenarioKind::OracleUncertainty => "oracle",
            ScenarioKind::RandomUncertainty => "random",
            ScenarioKind::OverconfidentByFactor { .. } => "overconfident",
        }
    }
}

pub fn generate_synthetic(sc: &SyntheticScenario) -> Result<ForecastSet> {
    sc.validate()?;
    let records: Vec<ForecastRecord> = (0..sc.n as u64)
        .into_par_iter()
        .map(|t| {
            let mut s = Stream::new(sc.seed, t);
            let x = s.uniform_range(X_RANGE.0, X_RANGE.1);
            let z = s.standard_normal();
            let random_sigma = s.uniform_range(RANDOM_SIGMA_RANGE.0, RANDOM_SIGMA_RANGE.1);
            let sigma = match sc.kind {
                ScenarioKind::OracleUncertainty => x,
                ScenarioKind::RandomUncertainty => random_sigma,
                ScenarioKind::OverconfidentByFactor { factor } => x / factor,
            };
            ForecastRecord {
                mu: x,
                sigma,
                y: x + x * z,
            }
        })
        .collect();
    ForecastSet::from_records(records, sc.label())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyRecord {
    pub y: f64,
    pub gamma: f64,
    pub pit: f64,
}

/// Targets `y_t ~ N(0, 1)` forecast by `Cauchy(0, |z_t|)` with `z_t ~ N(0, 1)`
/// independent of `y_t`. The PIT values are exactly uniform although the
/// scale carries no information about `y_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyCounterexampleSample {
    pub records: Vec<CauchyRecord>,
    pub seed: u64,
}

impl CauchyCounterexampleSample {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn pit_sample(&self) -> PitSample {
        PitSample::new(self.records.iter().map(|r| r.pit).collect())
            .expect("Cauchy PIT values lie in [0, 1]")
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Malformed(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn generate_cauchy_counterexample(n: usize, seed: u64) -> Result<CauchyCounterexampleSample> {
    if n < 10 {
        return Err(Error::TooFewRecords { needed: 10, got: n });
    }
    let records = (0..n as u64)
        .into_par_iter()
        .map(|t| {
            let mut s = Stream::new(seed, t);
            let y = s.standard_normal();
            let gamma = s.standard_normal().abs();
            let pit = (0.5 + libm::atan(y / gamma) / PI).clamp(0.0, 1.0);
            CauchyRecord { y, gamma, pit }
        })
        .collect();
    Ok(CauchyCounterexampleSample { records, seed })
}

/// Pearson correlation; NaN if either side has zero variance.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bits() {
        let sc = SyntheticScenario::new(ScenarioKind::RandomUncertainty, 1000, 42);
        let a = generate_synthetic(&sc).unwrap();
        let b = generate_synthetic(&sc).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        let c = generate_synthetic(&SyntheticScenario { seed: 43, ..sc }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn scenarios_share_targets() {
        let o = generate_synthetic(&SyntheticScenario::new(ScenarioKind::OracleUncertainty, 500, 1)).unwrap();
        let f = generate_synthetic(&SyntheticScenario::new(
            ScenarioKind::OverconfidentByFactor { factor: 2.0 },
            500,
            1,
        ))
        .unwrap();
        for (a, b) in o.records().iter().zip(f.records()) {
            assert_eq!((a.mu, a.y), (b.mu, b.y));
            assert_eq!(a.sigma, a.mu);
            assert!((b.sigma - a.sigma / 2.0).abs() < 1e-16);
        }
    }

    #[test]
    fn ranges() {
        let r = generate_synthetic(&SyntheticScenario::new(ScenarioKind::RandomUncertainty, 5000, 9)).unwrap();
        for rec in r.records() {
            assert!((0.1..=1.0).contains(&rec.mu));
            assert!((1.0..=10.0).contains(&rec.sigma));
        }
    }

    #[test]
    fn invalid_scenarios() {
        let bad = SyntheticScenario::new(ScenarioKind::OverconfidentByFactor { factor: 0.0 }, 10, 0);
        assert!(generate_synthetic(&bad).is_err());
        let empty = SyntheticScenario::new(ScenarioKind::OracleUncertainty, 0, 0);
        assert!(matches!(generate_synthetic(&empty), Err(Error::EmptyInput)));
        assert!(generate_cauchy_counterexample(9, 0).is_err());
    }

    #[test]
    fn half_normal_scale() {
        let c = generate_cauchy_counterexample(100_000, 5).unwrap();
        let mean_gamma = c.records.iter().map(|r| r.gamma).sum::<f64>() / c.len() as f64;
        assert!((mean_gamma - (2.0 / PI).sqrt()).abs() < 0.01);
    }

    #[test]
    fn correlation_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((correlation(&a, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
        assert!((correlation(&a, &[8.0, 6.0, 4.0, 2.0]) + 1.0).abs() < 1e-15);
        assert!(correlation(&a, &[1.0; 4]).is_nan());
    }
}
