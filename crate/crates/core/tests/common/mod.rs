// SPDX-License-Identifier: Apache-2.0

//! Reference implementations used as test oracles. Deliberately naive.

#![allow(dead_code)]

use calibre_reg::{ForecastRecord, ForecastSet};

/// Exact weighted isotonic least squares by exhaustive search.
///
/// The optimum is constant on contiguous blocks, each at its weighted mean,
/// so it is enough to try every split of `0..n` into blocks and keep the best
/// one whose block means are nondecreasing. `2^(n-1)` candidates.
pub fn brute_force_isotonic(y: &[f64], w: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    assert!((1..=16).contains(&n));
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let mut fit = vec![0.0; n];
        let mut start = 0;
        let mut prev = f64::NEG_INFINITY;
        let mut ok = true;
        for end in 1..=n {
            let cut = end == n || mask & (1 << (end - 1)) != 0;
            if !cut {
                continue;
            }
            let sw: f64 = w[start..end].iter().sum();
            let m = (start..end).map(|i| w[i] * y[i]).sum::<f64>() / sw;
            if m < prev {
                ok = false;
                break;
            }
            prev = m;
            fit[start..end].iter_mut().for_each(|v| *v = m);
            start = end;
        }
        if !ok {
            continue;
        }
        let sse = weighted_sse(y, w, &fit);
        if best.as_ref().is_none_or(|(_, b)| sse < *b) {
            best = Some((fit, sse));
        }
    }
    best.expect("the all-in-one-block split is always feasible")
}

pub fn weighted_sse(y: &[f64], w: &[f64], fit: &[f64]) -> f64 {
    y.iter()
        .zip(w)
        .zip(fit)
        .map(|((y, w), f)| w * (y - f).powi(2))
        .sum()
}

/// Mean Gaussian NLL of a set after multiplying every sigma by `s`.
pub fn nll_at(set: &ForecastSet, s: f64) -> f64 {
    let t = set.len() as f64;
    set.records()
        .iter()
        .map(|r| {
            let sd = s * r.sigma;
            let z = (r.y - r.mu) / sd;
            0.5 * (2.0 * std::f64::consts::PI * sd * sd).ln() + 0.5 * z * z
        })
        .sum::<f64>()
        / t
}

/// Golden-section search for the NLL-minimizing scale over `log s` in
/// `[ln lo, ln hi]`. The NLL is unimodal in `log s`.
pub fn golden_section_scale(set: &ForecastSet, lo: f64, hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |u: f64| nll_at(set, u.exp());
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (0.5 * (a + b)).exp()
}

/// Small deterministic LCG so oracle inputs do not come from the crate's RNG.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Box-Muller; only used to make test data.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// A set with heterogeneous sigmas and residuals at a random true scale.
pub fn random_set(rng: &mut Lcg, n: usize) -> ForecastSet {
    let true_scale = rng.range(0.2, 5.0);
    let records = (0..n)
        .map(|_| {
            let mu = rng.range(-10.0, 10.0);
            let sigma = rng.range(0.05, 3.0);
            let y = mu + true_scale * sigma * rng.normal();
            ForecastRecord { mu, sigma, y }
        })
        .collect();
    ForecastSet::from_records(records, "random").unwrap()
}
