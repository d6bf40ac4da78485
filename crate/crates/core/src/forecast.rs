// SPDX-License-Identifier: Apache-2.0

//! Forecast records and validated forecast sets.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::permutation;

/// One Gaussian forecast `N(mu, sigma^2)` together with the observed target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub mu: f64,
    pub sigma: f64,
    pub y: f64,
}

impl ForecastRecord {
    fn check(&self, row: usize) -> Result<()> {
        for (field, v) in [("mu", self.mu), ("sigma", self.sigma), ("y", self.y)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, field });
            }
        }
        if self.sigma <= 0.0 {
            return Err(Error::NonPositiveSigma { row });
        }
        Ok(())
    }

    #[inline]
    pub fn residual(&self) -> f64 {
        self.y - self.mu
    }
}

/// A non-empty, validated, ordered collection of forecast records.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    records: Vec<ForecastRecord>,
    label: String,
}

impl ForecastSet {
    /// Validates `rows` of `(mu, sigma, y)` and keeps their order.
    pub fn from_rows<I>(rows: I, label: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64, f64)>,
    {
        let records = rows
            .into_iter()
            .map(|(mu, sigma, y)| ForecastRecord { mu, sigma, y })
            .collect();
        Self::from_records(records, label)
    }

    pub fn from_records(records: Vec<ForecastRecord>, label: impl Into<String>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (row, r) in records.iter().enumerate() {
            r.check(row)?;
        }
        Ok(ForecastSet {
            records,
            label: label.into(),
        })
    }

    /// Constructor for records already known to be valid.
    pub(crate) fn from_valid(records: Vec<ForecastRecord>, label: impl Into<String>) -> Self {
        debug_assert!(!records.is_empty());
        debug_assert!(records.iter().enumerate().all(|(i, r)| r.check(i).is_ok()));
        ForecastSet {
            records,
            label: label.into(),
        }
    }

    pub fn records(&self) -> &[ForecastRecord] {
        &self.records
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Always false; sets are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn sigmas(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.sigma)
    }

    /// Replaces every sigma, keeping mu and y untouched.
    pub fn map_sigma(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let records = self
            .records
            .iter()
            .map(|r| ForecastRecord {
                sigma: f(r.sigma),
                ..*r
            })
            .collect();
        Self::from_records(records, self.label.clone())
    }

    /// Subset by indices, in the order given.
    pub fn select(&self, indices: &[usize], label: impl Into<String>) -> Result<Self> {
        let records = indices
            .iter()
            .map(|&i| {
                self.records
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::Usage(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_records(records, label)
    }

    /// First `n_first` records and the rest, both required to be non-empty.
    pub fn split_at(&self, n_first: usize) -> Result<(Self, Self)> {
        if n_first == 0 || n_first >= self.len() {
            return Err(Error::Usage(format!(
                "cannot split {} records at {n_first}",
                self.len()
            )));
        }
        let (a, b) = self.records.split_at(n_first);
        Ok((
            Self::from_valid(a.to_vec(), "recalibration"),
            Self::from_valid(b.to_vec(), "validation"),
        ))
    }

    /// Seeded random split; `fraction` of the records go to the first set.
    /// Both subsets keep the original relative order.
    pub fn split_random(&self, fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Usage(format!(
                "split fraction must be in (0, 1), got {fraction}"
            )));
        }
        let n = self.len();
        let n_first = (fraction * n as f64).round() as usize;
        if n_first == 0 || n_first >= n {
            return Err(Error::Usage(format!(
                "split fraction {fraction} leaves an empty side for {n} records"
            )));
        }
        let perm = permutation(n, seed);
        let mut first = perm[..n_first].to_vec();
        let mut second = perm[n_first..].to_vec();
        first.sort_unstable();
        second.sort_unstable();
        Ok((
            self.select(&first, "recalibration")?,
            self.select(&second, "validation")?,
        ))
    }

    /// Reads CSV with a `mu,sigma,y` header.
    pub fn read_csv<R: Read>(reader: R, label: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Malformed(e.to_string()))?
            .clone();
        let cols: Vec<&str> = headers.iter().collect();
        if cols != ["mu", "sigma", "y"] {
            return Err(Error::Malformed(format!(
                "expected header `mu,sigma,y`, found `{}`",
                cols.join(",")
            )));
        }
        let mut records = Vec::new();
        for (row, rec) in rdr.deserialize::<ForecastRecord>().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        Self::from_records(records, label)
    }

    /// Reads a JSON array of `{"mu", "sigma", "y"}` objects.
    pub fn read_json<R: Read>(reader: R, label: impl Into<String>) -> Result<Self> {
        let values: Vec<serde_json::Value> = serde_json::from_reader(reader)?;
        let records = values
            .into_iter()
            .enumerate()
            .map(|(row, v)| {
                serde_json::from_value::<ForecastRecord>(v).map_err(|e| Error::Parse {
                    row,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_records(records, label)
    }

    /// Loads CSV or JSON, deciding by the first non-blank byte (`[` means JSON).
    pub fn load(path: &Path, label: impl Into<String>) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let bytes = std::fs::read(path)?;
        let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
        match first {
            None => Err(Error::EmptyInput),
            Some(b'[') => Self::read_json(bytes.as_slice(), label),
            Some(_) => Self::read_csv(bytes.as_slice(), label),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Malformed(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.records).expect("records serialize")
    }
}
