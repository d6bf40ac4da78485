// SPDX-License-Identifier: Apache-2.0

//! One-dimensional predictive CDFs.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_quantile};

/// Anything that can be evaluated as a cumulative distribution function.
pub trait Cdf {
    fn cdf(&self, u: f64) -> f64;

    /// Points where the CDF may fail to be smooth. Quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, u: f64) -> f64 {
        self(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CdfForecast {
    Gaussian { mu: f64, sigma: f64 },
    Cauchy { location: f64, scale: f64 },
    /// `map(base(u))`, clamped to `[0, 1]`.
    Recalibrated {
        base: Box<CdfForecast>,
        map: Arc<MonotoneMap>,
    },
}

impl CdfForecast {
    pub fn gaussian(mu: f64, sigma: f64) -> Self {
        CdfForecast::Gaussian { mu, sigma }
    }

    pub fn cauchy(location: f64, scale: f64) -> Self {
        CdfForecast::Cauchy { location, scale }
    }

    pub fn recalibrated(base: CdfForecast, map: Arc<MonotoneMap>) -> Self {
        CdfForecast::Recalibrated {
            base: Box::new(base),
            map,
        }
    }

    /// Inverse CDF for the closed-form kinds; `None` for recalibrated forecasts.
    pub fn quantile(&self, p: f64) -> Option<f64> {
        match self {
            CdfForecast::Gaussian { mu, sigma } => Some(mu + sigma * normal_quantile(p)),
            CdfForecast::Cauchy { location, scale } => {
                Some(location + scale * libm::tan(PI * (p - 0.5)))
            }
            CdfForecast::Recalibrated { .. } => None,
        }
    }

    /// Smallest `u` (to double resolution) at which the floating-point CDF
    /// of a closed-form base satisfies `pred`, searching outward from `guess`.
    /// `pred` must be false below the boundary and true above it.
    fn boundary(&self, pred: impl Fn(f64) -> bool, guess: f64) -> Option<f64> {
        let (_, scale) = self.location_scale();
        let max_step = 1e3 * scale;
        let mut step = 1e-8 * scale;
        let (mut lo, mut hi) = if pred(self.cdf(guess)) {
            loop {
                let lo = guess - step;
                if !pred(self.cdf(lo)) {
                    break (lo, guess);
                }
                step *= 2.0;
                if step > max_step {
                    return None;
                }
            }
        } else {
            loop {
                let hi = guess + step;
                if pred(self.cdf(hi)) {
                    break (guess, hi);
                }
                step *= 2.0;
                if step > max_step {
                    return None;
                }
            }
        };
        loop {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                return Some(hi);
            }
            if pred(self.cdf(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// Location and scale of the innermost base, used to size integration ranges.
    pub fn location_scale(&self) -> (f64, f64) {
        match self {
            CdfForecast::Gaussian { mu, sigma } => (*mu, *sigma),
            CdfForecast::Cauchy { location, scale } => (*location, *scale),
            CdfForecast::Recalibrated { base, .. } => base.location_scale(),
        }
    }
}

impl Cdf for CdfForecast {
    fn cdf(&self, u: f64) -> f64 {
        match self {
            CdfForecast::Gaussian { mu, sigma } => normal_cdf((u - mu) / sigma),
            CdfForecast::Cauchy { location, scale } => {
                0.5 + libm::atan((u - location) / scale) / PI
            }
            CdfForecast::Recalibrated { base, map } => map.eval(base.cdf(u)).clamp(0.0, 1.0),
        }
    }

    /// For a recalibrated closed-form base: the base quantiles of the map's
    /// interior knots. Nested recalibrations only report the inner breakpoints.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            CdfForecast::Gaussian { .. } | CdfForecast::Cauchy { .. } => Vec::new(),
            CdfForecast::Recalibrated { base, map } => {
                let mut pts = base.breakpoints();
                if matches!(**base, CdfForecast::Recalibrated { .. }) {
                    return pts;
                }
                // Where the rounded base CDF first reaches each knot; the
                // analytic quantile can miss that by many ulps in the tails.
                pts.extend(
                    map.knots()
                        .filter(|&(x, _)| x > 0.0 && x < 1.0)
                        .filter_map(|(x, _)| {
                            let guess = base.quantile(x).filter(|u| u.is_finite())?;
                            base.boundary(|c| c >= x, guess)
                        }),
                );
                // PIT values that rounded to exactly 0 or 1 put a jump where
                // the base CDF saturates.
                let (loc, _) = base.location_scale();
                pts.extend(base.boundary(|c| c > 0.0, loc));
                pts.extend(base.boundary(|c| c >= 1.0, loc));
                // Just below 1 the base CDF only takes the values 1 - k*2^-53,
                // and a steep map turns each step into a visible jump.
                if map.knots().any(|(x, _)| (TOP_LEVELS_FROM..1.0).contains(&x)) {
                    pts.extend((1..=TOP_LEVELS).filter_map(|k| {
                        let level = 1.0 - k as f64 * f64::EPSILON / 2.0;
                        base.boundary(|c| c >= level, loc)
                    }));
                }
                pts
            }
        }
    }
}

const TOP_LEVELS: u32 = 64;
const TOP_LEVELS_FROM: f64 = 1.0 - TOP_LEVELS as f64 * f64::EPSILON / 2.0;

/// How a [`MonotoneMap`] is evaluated between knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Linear,
    /// Right-continuous step: value of the last knot at or left of `x`.
    Step,
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Interpolation::Linear),
            "step" => Ok(Interpolation::Step),
            other => Err(Error::Usage(format!("unknown interpolation `{other}`"))),
        }
    }
}

/// Nondecreasing piecewise map through a list of knots.
///
/// Knot abscissae are strictly increasing and ordinates nondecreasing.
/// Outside the knot range the map is flat at the end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct MonotoneMap {
    xs: Vec<f64>,
    ys: Vec<f64>,
    interpolation: Interpolation,
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    interpolation: Interpolation,
    knots: Vec<(f64, f64)>,
}

impl TryFrom<MapRepr> for MonotoneMap {
    type Error = Error;

    fn try_from(r: MapRepr) -> Result<Self> {
        MonotoneMap::new(r.knots, r.interpolation)
    }
}

impl From<MonotoneMap> for MapRepr {
    fn from(m: MonotoneMap) -> Self {
        MapRepr {
            interpolation: m.interpolation,
            knots: m.knots().collect(),
        }
    }
}

impl MonotoneMap {
    pub fn new(knots: Vec<(f64, f64)>, interpolation: Interpolation) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Malformed("monotone map needs at least one knot".into()));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::Malformed(format!(
                    "knot x values must be strictly increasing (knot {})",
                    i + 1
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Malformed(format!(
                    "knot y values must be nondecreasing (knot {})",
                    i + 1
                )));
            }
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Malformed("knots must be finite".into()));
        }
        let (xs, ys) = knots.into_iter().unzip();
        Ok(MonotoneMap {
            xs,
            ys,
            interpolation,
        })
    }

    pub fn identity() -> Self {
        MonotoneMap {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
            interpolation: Interpolation::Linear,
        }
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        // xs[i-1] < x <= xs[i]
        let i = self.xs.partition_point(|&k| k < x);
        match self.interpolation {
            Interpolation::Step => {
                if self.xs[i] == x {
                    self.ys[i]
                } else {
                    self.ys[i - 1]
                }
            }
            Interpolation::Linear => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (y0, y1) = (self.ys[i - 1], self.ys[i]);
                let t = (x - x0) / (x1 - x0);
                y0 + t * (y1 - y0)
            }
        }
    }
}
