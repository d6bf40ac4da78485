// SPDX-License-Identifier: Apache-2.0

//! Romberg integration.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Romberg {
    /// Stop when successive diagonal estimates differ by less than this, relative.
    pub rel_tol: f64,
    /// Absolute floor so integrals that are exactly zero can terminate.
    pub abs_tol: f64,
    /// Minimum number of halvings before the convergence test is trusted.
    pub min_levels: usize,
    /// Maximum number of halvings (`2^max_levels` trapezoid panels).
    pub max_levels: usize,
}

impl Default for Romberg {
    fn default() -> Self {
        Romberg {
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            min_levels: 5,
            max_levels: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub levels: usize,
    pub evaluations: usize,
}

impl Romberg {
    /// Integrates `f` over `[a, b]`.
    ///
    /// Row `k` of the tableau starts from the trapezoid rule on `2^k` panels
    /// (reusing all earlier samples) and applies Richardson extrapolation.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                levels: 0,
                evaluations: 0,
            });
        }
        let h0 = b - a;
        let mut prev = vec![0.5 * h0 * (f(a) + f(b))];
        let mut evaluations = 2;
        for k in 1..=self.max_levels {
            let panels = 1usize << k;
            let h = h0 / panels as f64;
            let mut mid = 0.0;
            for i in (1..panels).step_by(2) {
                mid += f(a + i as f64 * h);
            }
            evaluations += panels / 2;

            let mut row = Vec::with_capacity(k + 1);
            row.push(0.5 * prev[0] + h * mid);
            let mut factor = 1.0;
            for m in 1..=k {
                factor *= 4.0;
                let r = row[m - 1] + (row[m - 1] - prev[m - 1]) / (factor - 1.0);
                row.push(r);
            }

            let (cur, old) = (row[k], prev[k - 1]);
            if !cur.is_finite() {
                return Err(Error::MomentNonConvergence);
            }
            if k >= self.min_levels && (cur - old).abs() <= self.rel_tol * cur.abs().max(self.abs_tol)
            {
                return Ok(Estimate {
                    value: cur,
                    levels: k,
                    evaluations,
                });
            }
            prev = row;
        }
        Err(Error::MomentNonConvergence)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = Romberg::default();
        let e = r.integrate(|x| 3.0 * x * x + 2.0 * x + 1.0, 0.0, 2.0).unwrap();
        assert!((e.value - 14.0).abs() < 1e-12);
        let e = r.integrate(|x| x.powi(5), -1.0, 3.0).unwrap();
        assert!((e.value - (729.0 - 1.0) / 6.0).abs() < 1e-9);
    }

    #[test]
    fn smooth_functions() {
        let r = Romberg::default();
        let e = r.integrate(f64::sin, 0.0, std::f64::consts::PI).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
        let e = r.integrate(f64::exp, 0.0, 1.0).unwrap();
        assert!((e.value - (1f64.exp() - 1.0)).abs() < 1e-10);
        // reversed limits flip the sign
        let e = r.integrate(f64::exp, 1.0, 0.0).unwrap();
        assert!((e.value + (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn zero_integral_terminates() {
        let r = Romberg::default();
        let e = r.integrate(|_| 0.0, -1.0, 1.0).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(r.integrate(|x| x, 2.0, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn kinked_integrand_converges() {
        let r = Romberg::default();
        let e = r.integrate(|x: f64| x.abs(), -1.0, 2.0).unwrap();
        assert!((e.value - 2.5).abs() < 1e-8);
    }

    #[test]
    fn depth_limit_reports_non_convergence() {
        let r = Romberg {
            max_levels: 6,
            ..Romberg::default()
        };
        let wiggle = |x: f64| (1000.0 * x).sin().abs() + x.sqrt();
        assert!(matches!(r.integrate(wiggle, 0.0, 1.0), Err(Error::MomentNonConvergence)));
        assert!(matches!(
            Romberg::default().integrate(|x| 1.0 / x, -1.0, 1.0),
            Err(Error::MomentNonConvergence)
        ));
    }
}
