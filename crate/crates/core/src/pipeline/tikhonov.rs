//! Tikhonov-regularized least squares with the parameter chosen by the
//! discrepancy principle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::config;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TikhonovReport {
    pub lambda: f64,
    pub residual: f64,
    /// `tau * ||noise||`, the residual the parameter was tuned to.
    pub target: f64,
    pub condition_number: f64,
    pub singular_values: Vec<f64>,
    /// True when even `lambda -> 0` leaves a residual above the target.
    pub target_unreachable: bool,
}

#[derive(Debug, Clone)]
pub struct TikhonovSolution {
    pub x: DVector<Complex64>,
    pub report: TikhonovReport,
}

/// Minimizes `|A x - b|^2 + lambda^2 |x|^2` with `lambda` chosen so that
/// the residual equals `tau * |noise|`.
pub fn solve_discrepancy(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    noise: &[f64],
    tau: f64,
) -> Result<TikhonovSolution> {
    if a.nrows() != b.len() || noise.len() != b.len() {
        return config("Tikhonov system has inconsistent sizes");
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return config("Tikhonov system is empty");
    }
    if !(tau > 0.0) {
        return config("discrepancy factor must be positive");
    }
    let svd = a.clone().svd(true, true);
    let (u, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let beta: Vec<Complex64> = (0..sigma.len()).map(|i| u.column(i).dotc(b)).collect();
    // Part of b outside the range of U.
    let projected: f64 = beta.iter().map(|c| c.norm_sqr()).sum();
    let outside = (b.norm_squared() - projected).max(0.0);

    let residual = |lambda: f64| -> f64 {
        let l2 = lambda * lambda;
        let inside: f64 = sigma
            .iter()
            .zip(&beta)
            .map(|(s, c)| (l2 / (s * s + l2)).powi(2) * c.norm_sqr())
            .sum();
        (inside + outside).sqrt()
    };
    let target = tau * noise.iter().map(|e| e * e).sum::<f64>().sqrt();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let smin = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let (lambda, target_unreachable) = if residual(0.0) >= target {
        (0.0, true)
    } else if smax == 0.0 {
        (0.0, false)
    } else {
        // Residual increases with lambda; bisect in log space.
        let mut lo = (smax * 1e-12).ln();
        let mut hi = (smax * 1e6).ln();
        if residual(hi.exp()) <= target {
            (hi.exp(), false)
        } else {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if residual(mid.exp()) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo.exp(), false)
        }
    };
    let mut x = DVector::<Complex64>::zeros(a.ncols());
    for (i, (&s, c)) in sigma.iter().zip(&beta).enumerate() {
        let denom = s * s + lambda * lambda;
        if denom == 0.0 {
            continue;
        }
        let filt = *c * (s / denom);
        x += v_t.row(i).transpose().map(|z| z.conj()) * filt;
    }
    Ok(TikhonovSolution {
        x,
        report: TikhonovReport {
            lambda,
            residual: residual(lambda),
            target,
            condition_number: if smin > 0.0 { smax / smin } else { f64::INFINITY },
            singular_values: sigma,
            target_unreachable,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_noise_gives_least_squares_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[c(1.0), c(0.0), c(0.0), c(2.0), c(1.0), c(1.0)]);
        let x0 = DVector::from_vec(vec![Complex64::new(1.0, -1.0), Complex64::new(0.5, 2.0)]);
        let b = &a * &x0;
        let s = solve_discrepancy(&a, &b, &[0.0; 3], 1.0).unwrap();
        assert!(s.report.target_unreachable);
        assert_relative_eq!((s.x - x0).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn residual_matches_target() {
        let a = DMatrix::from_fn(6, 4, |i, j| c(1.0 / (1.0 + i as f64 + j as f64)));
        let x0 = DVector::from_fn(4, |i, _| Complex64::new((i as f64).sin(), (i as f64).cos()));
        let b = &a * x0 + DVector::from_fn(6, |i, _| c(0.01 * (i as f64 - 2.5)));
        let noise = [0.05; 6];
        let s = solve_discrepancy(&a, &b, &noise, 1.0).unwrap();
        let r = (&a * &s.x - &b).norm();
        assert!(!s.report.target_unreachable);
        assert_relative_eq!(r, s.report.target, max_relative = 1e-8);
        assert!(s.report.lambda > 0.0);
        let sv = a.singular_values();
        assert_relative_eq!(s.report.condition_number, sv.max() / sv.min(), max_relative = 1e-10);
    }

    #[test]
    fn inconsistent_sizes_are_rejected() {
        let a = DMatrix::from_element(2, 2, c(1.0));
        let b = DVector::from_element(3, c(1.0));
        assert!(solve_discrepancy(&a, &b, &[0.0; 3], 1.0).is_err());
    }
}
