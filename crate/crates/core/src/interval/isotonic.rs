// SPDX-License-Identifier: Apache-2.0

//! Weighted isotonic (nondecreasing least-squares) regression by
//! pool-adjacent-violators.

use crate::cdf::{Interpolation, MonotoneMap};
use crate::error::{Error, Result};

struct Block {
    wy: f64,
    w: f64,
    len: usize,
}

impl Block {
    fn mean(&self) -> f64 {
        self.wy / self.w
    }
}

/// PAVA on a sequence already ordered by x. Returns one fitted value per input.
pub fn pava(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len(), "values and weights differ in length");
    let mut stack: Vec<Block> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        stack.push(Block {
            wy: wi * yi,
            w: wi,
            len: 1,
        });
        while stack.len() >= 2 {
            let n = stack.len();
            if stack[n - 2].mean() <= stack[n - 1].mean() {
                break;
            }
            let top = stack.pop().unwrap();
            let prev = stack.last_mut().unwrap();
            prev.wy += top.wy;
            prev.w += top.w;
            prev.len += top.len;
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for b in &stack {
        let m = b.mean();
        out.extend(std::iter::repeat_n(m, b.len));
    }
    out
}

/// Fits a nondecreasing map to `(x, y)` points minimising weighted squared error.
///
/// Points are sorted by x; points sharing an x are first merged into one
/// with their weighted mean y and summed weight. `weights = None` means unit
/// weights. The result has one knot per distinct x.
pub fn fit_isotonic(
    points: &[(f64, f64)],
    weights: Option<&[f64]>,
    interpolation: Interpolation,
) -> Result<MonotoneMap> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(w) = weights {
        if w.len() != points.len() {
            return Err(Error::Usage(format!(
                "{} weights for {} points",
                w.len(),
                points.len()
            )));
        }
        if let Some(i) = w.iter().position(|&wi| !(wi > 0.0 && wi.is_finite())) {
            return Err(Error::Malformed(format!("weight {i} must be positive and finite")));
        }
    }
    if let Some(i) = points
        .iter()
        .position(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(Error::NonFinite {
            row: i,
            field: "point",
        });
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0));

    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    for &i in &order {
        let (x, y) = points[i];
        let wi = weight(i);
        if xs.last() == Some(&x) {
            let k = xs.len() - 1;
            let total = ws[k] + wi;
            ys[k] = (ys[k] * ws[k] + y * wi) / total;
            ws[k] = total;
        } else {
            xs.push(x);
            ys.push(y);
            ws.push(wi);
        }
    }

    let fitted = pava(&ys, &ws);
    MonotoneMap::new(xs.into_iter().zip(fitted).collect(), interpolation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit_values(y: &[f64]) -> Vec<f64> {
        let pts: Vec<_> = y.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        fit_isotonic(&pts, None, Interpolation::Linear)
            .unwrap()
            .knots()
            .map(|k| k.1)
            .collect()
    }

    #[test]
    fn monotone_input_is_a_perfect_fit() {
        let y = [0.1, 0.2, 0.2, 0.5, 0.9];
        assert_eq!(fit_values(&y), y.to_vec());
    }

    #[test]
    fn small_violations() {
        // expected values from the brute-force block enumeration in tests/common
        assert_eq!(fit_values(&[3.0, 1.0, 2.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(fit_values(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn x_ties_are_pre_averaged() {
        let pts = [(1.0, 4.0), (0.0, 0.0), (1.0, 2.0), (2.0, 1.0)];
        let m = fit_isotonic(&pts, None, Interpolation::Linear).unwrap();
        let knots: Vec<_> = m.knots().collect();
        // tie at x=1 -> (3, w=2); then (3,w2),(1,w1) pool to 7/3
        assert_eq!(knots.len(), 3);
        assert_eq!(knots[0], (0.0, 0.0));
        assert!((knots[1].1 - 7.0 / 3.0).abs() < 1e-15);
        assert!((knots[2].1 - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weights_shift_pooled_means() {
        let pts = [(0.0, 2.0), (1.0, 0.0)];
        let m = fit_isotonic(&pts, Some(&[3.0, 1.0]), Interpolation::Linear).unwrap();
        let ys: Vec<f64> = m.knots().map(|k| k.1).collect();
        assert_eq!(ys, vec![1.5, 1.5]);
    }

    #[test]
    fn bad_inputs() {
        assert!(fit_isotonic(&[], None, Interpolation::Linear).is_err());
        assert!(fit_isotonic(&[(0.0, 1.0)], Some(&[0.0]), Interpolation::Linear).is_err());
        assert!(fit_isotonic(&[(0.0, 1.0)], Some(&[1.0, 1.0]), Interpolation::Linear).is_err());
        assert!(fit_isotonic(&[(f64::NAN, 1.0)], None, Interpolation::Linear).is_err());
    }
}
