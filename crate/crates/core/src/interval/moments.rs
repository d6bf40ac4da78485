// SPDX-License-Identifier: Apache-2.0

//! Mean and variance of a distribution known only through its CDF.
//!
//! With `X` centred at `c` (`V = X - c`, `G(v) = F(c + v)`):
//!
//! ```text
//! E[V]   = ∫_0^∞ (1 - G(v)) dv - ∫_{-∞}^0 G(v) dv
//! E[V^2] = 2 ∫_0^∞ v (1 - G(v)) dv - 2 ∫_{-∞}^0 v G(v) dv
//! ```
//!
//! and `Var[X] = E[V^2] - E[V]^2`. On nonnegative support with `c = 0` this
//! is the familiar `2∫u(1-F) - (∫(1-F))^2`. Integrals run over
//! `[-k*scale, k*scale]` with Romberg, applied piecewise between the CDF's
//! reported breakpoints. A side whose tail mass exceeds [`TAIL_TOL`] is
//! doubled, at most [`MAX_WIDENINGS`] times; a CDF still heavier than that
//! (Cauchy, say) is reported as not converging.

use serde::{Deserialize, Serialize};

use crate::cdf::Cdf;
use crate::error::{Error, Result};
use crate::quadrature::Romberg;

/// Initial half-width of the integration window, in units of `scale_hint`.
pub const TRUNCATION_SCALES: f64 = 12.0;
/// Times each side of the window may double before giving up.
pub const MAX_WIDENINGS: usize = 10;
/// Largest tail mass tolerated outside the window.
pub const TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn moments_from_cdf<F: Cdf + ?Sized>(f: &F, center_hint: f64, scale_hint: f64) -> Result<Moments> {
    moments_with(f, center_hint, scale_hint, &Romberg::default())
}

pub fn moments_with<F: Cdf + ?Sized>(
    f: &F,
    center_hint: f64,
    scale_hint: f64,
    romberg: &Romberg,
) -> Result<Moments> {
    if !center_hint.is_finite() || !(scale_hint > 0.0 && scale_hint.is_finite()) {
        return Err(Error::Usage(format!(
            "moment window needs finite center and positive scale, got ({center_hint}, {scale_hint})"
        )));
    }
    let g = |v: f64| f.cdf(center_hint + v);

    // Each side of the window doubles until the mass beyond it is negligible.
    // The abandoned edges stay as cut points so the pieces grow geometrically.
    let base = TRUNCATION_SCALES * scale_hint;
    let widen = |tail: &dyn Fn(f64) -> f64| -> Result<Vec<f64>> {
        let mut edges = vec![base];
        while tail(*edges.last().unwrap()) > TAIL_TOL {
            if edges.len() > MAX_WIDENINGS {
                return Err(Error::MomentNonConvergence);
            }
            let next = 2.0 * edges.last().unwrap();
            edges.push(next);
        }
        Ok(edges)
    };
    let below = widen(&|h| g(-h))?;
    let above = widen(&|h| 1.0 - g(h))?;
    let (lo_end, hi_end) = (-*below.last().unwrap(), *above.last().unwrap());

    let mut cuts: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .map(|b| b - center_hint)
        .filter(|v| *v > lo_end && *v < hi_end && *v != 0.0)
        .chain(below[..below.len() - 1].iter().map(|h| -h))
        .chain(above[..above.len() - 1].iter().copied())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let split = cuts.partition_point(|&v| v < 0.0);
    let lower_edges: Vec<f64> = std::iter::once(lo_end)
        .chain(cuts[..split].iter().copied())
        .chain(std::iter::once(0.0))
        .collect();
    let upper_edges: Vec<f64> = std::iter::once(0.0)
        .chain(cuts[split..].iter().copied())
        .chain(std::iter::once(hi_end))
        .collect();

    // Endpoints are sampled a hair inside each piece so a jump sitting exactly
    // on a breakpoint contributes its one-sided limit. A piece holding almost
    // no mass is judged against its share of the window's natural size
    // (`unit`) rather than against its own tiny value.
    let n_pieces = (lower_edges.len() + upper_edges.len() - 2) as f64;
    let piecewise = |h: &dyn Fn(f64) -> f64, edges: &[f64], unit: f64| -> Result<f64> {
        let rule = Romberg {
            abs_tol: romberg.abs_tol.max(unit / n_pieces),
            ..*romberg
        };
        edges
            .windows(2)
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                let nudge = (hi - lo) * 1e-10;
                let inner = |v: f64| h(v.clamp(lo + nudge, hi - nudge));
                rule.integrate(inner, lo, hi).map(|e| e.value)
            })
            .sum()
    };
    let s1 = scale_hint;
    let s2 = scale_hint * scale_hint;
    let upper = piecewise(&|v| 1.0 - g(v), &upper_edges, s1)?;
    let lower = piecewise(&g, &lower_edges, s1)?;
    let upper2 = piecewise(&|v| v * (1.0 - g(v)), &upper_edges, s2)?;
    let lower2 = piecewise(&|v| v * g(v), &lower_edges, s2)?;

    let m1 = upper - lower;
    let m2 = 2.0 * upper2 - 2.0 * lower2;
    let variance = m2 - m1 * m1;
    if !variance.is_finite() || variance < 0.0 {
        return Err(Error::MomentNonConvergence);
    }
    Ok(Moments {
        mean: center_hint + m1,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdf::{CdfForecast, Interpolation, MonotoneMap};
    use std::sync::Arc;

    #[test]
    fn gaussian_moments() {
        let m = moments_from_cdf(&CdfForecast::gaussian(3.0, 2.0), 3.0, 2.0).unwrap();
        assert!((m.mean - 3.0).abs() < 1e-4);
        assert!((m.variance - 4.0).abs() < 1e-3);
        // off-centre hint still works while the window covers the mass
        let m = moments_from_cdf(&CdfForecast::gaussian(3.0, 2.0), 2.0, 2.5).unwrap();
        assert!((m.mean - 3.0).abs() < 1e-6);
        assert!((m.variance - 4.0).abs() < 1e-5);
    }

    #[test]
    fn uniform_moments() {
        let uniform = |u: f64| u.clamp(0.0, 1.0);
        let m = moments_from_cdf(&uniform, 0.5, 0.3).unwrap();
        assert!((m.mean - 0.5).abs() < 1e-6);
        assert!((m.variance - 1.0 / 12.0).abs() < 1e-6);
    }

    #[test]
    fn window_widens_for_understated_scale() {
        let m = moments_from_cdf(&CdfForecast::gaussian(1.0, 5.0), 0.0, 1.0).unwrap();
        assert!((m.mean - 1.0).abs() < 1e-6);
        assert!((m.variance - 25.0).abs() < 1e-5);
    }

    #[test]
    fn saturated_pit_jump_still_integrates() {
        // Mass pinned at the top knot: the map jumps where the base CDF hits 1.
        let map = MonotoneMap::new(
            vec![(0.0, 0.0), (0.5, 0.5), (1.0 - f64::EPSILON, 0.99), (1.0, 1.0)],
            Interpolation::Linear,
        )
        .unwrap();
        let f = CdfForecast::recalibrated(CdfForecast::gaussian(0.0, 1.0), Arc::new(map));
        let m = moments_from_cdf(&f, 0.0, 1.0).unwrap();
        assert!(m.mean.is_finite() && m.variance > 0.0);
    }

    #[test]
    fn cauchy_does_not_converge() {
        let e = moments_from_cdf(&CdfForecast::cauchy(0.0, 1.0), 0.0, 1.0).unwrap_err();
        assert_eq!(e.to_string(), "moment integral did not converge");
    }

    #[test]
    fn identity_recalibration_preserves_moments() {
        let base = CdfForecast::gaussian(-1.5, 0.7);
        let r = CdfForecast::recalibrated(base.clone(), Arc::new(MonotoneMap::identity()));
        let a = moments_from_cdf(&base, -1.5, 0.7).unwrap();
        let b = moments_from_cdf(&r, -1.5, 0.7).unwrap();
        assert!((a.mean - b.mean).abs() < 1e-8);
        assert!((a.variance - b.variance).abs() < 1e-8 * a.variance);
    }

    #[test]
    fn bad_window() {
        let g = CdfForecast::gaussian(0.0, 1.0);
        assert!(matches!(moments_from_cdf(&g, 0.0, 0.0), Err(Error::Usage(_))));
        assert!(matches!(moments_from_cdf(&g, f64::NAN, 1.0), Err(Error::Usage(_))));
    }
}
