// SPDX-License-Identifier: Apache-2.0

//! Serialized calibrator artifacts, tagged by method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastSet;
use crate::interval::IntervalCalibrator;
use crate::scaling::ScalingCalibrator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    StdScaling,
    Interval,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "std_scaling" => Ok(Method::StdScaling),
            "interval" => Ok(Method::Interval),
            other => Err(Error::Usage(format!(
                "unknown method `{other}` (expected std_scaling or interval)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Calibrator {
    StdScaling(ScalingCalibrator),
    Interval(IntervalCalibrator),
}

/// A recalibrated set plus how many input records were dropped on the way.
#[derive(Debug, Clone)]
pub struct Applied {
    pub set: ForecastSet,
    pub skipped: usize,
}

impl Calibrator {
    pub fn method(&self) -> Method {
        match self {
            Calibrator::StdScaling(_) => Method::StdScaling,
            Calibrator::Interval(_) => Method::Interval,
        }
    }

    pub fn apply(&self, set: &ForecastSet) -> Result<Applied> {
        match self {
            Calibrator::StdScaling(c) => Ok(Applied {
                set: c.apply(set)?,
                skipped: 0,
            }),
            Calibrator::Interval(c) => {
                let r = c.apply(set)?;
                Ok(Applied {
                    set: r.set,
                    skipped: r.skipped,
                })
            }
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibrator serializes")
    }
}
