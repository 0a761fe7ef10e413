//! The directional Cauchy transform
//! `(N f)(x) = 1/(2 pi) int_{R^2} f(x - y_1 Re z0 - y_2 Im z0) / (y_1 + i y_2) dy`,
//! the inverse of `z0 . grad` on compactly supported functions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain};
use crate::grid::quadrature::l2_norm;
use crate::grid::{gradient_fd, ComplexField, Domain, FieldValue, Grid, NodeField};
use crate::Result;
use std::f64::consts::PI;
use std::sync::Arc;

const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CauchyParams {
    /// Quadrature cell width as a fraction of the smallest grid spacing.
    pub step_factor: f64,
    /// Truncation radius as a multiple of the support diameter.
    pub radius_factor: f64,
}

impl Default for CauchyParams {
    fn default() -> Self {
        CauchyParams {
            step_factor: 0.5,
            radius_factor: 3.0,
        }
    }
}

/// A compactly supported source, zero outside `support`.
pub struct PlaneSource<'a> {
    pub support: Domain,
    pub f: &'a (dyn Fn(&[f64]) -> Complex64 + Sync),
}

#[derive(Debug, Clone)]
pub struct CauchyOutput {
    pub values: Vec<Complex64>,
    /// Bound on the integral discarded by the truncation disk, zero when
    /// the support never leaves it.
    pub tail_bound: f64,
    /// Quadrature cells visited, summed over output points.
    pub cells: usize,
}

/// `(Re z0, Im z0)` after checking they are orthonormal.
pub fn plane_frame(zeta0: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let re: Vec<f64> = zeta0.iter().map(|z| z.re).collect();
    let im: Vec<f64> = zeta0.iter().map(|z| z.im).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    if (dot(&re, &re) - 1.0).abs() > ORTHONORMAL_TOL
        || (dot(&im, &im) - 1.0).abs() > ORTHONORMAL_TOL
        || dot(&re, &im).abs() > ORTHONORMAL_TOL
    {
        return domain("Re z0 and Im z0 must be orthonormal");
    }
    Ok((re, im))
}

/// `+1` or `-1` so that `sign * z0` has its first nonzero real part
/// positive. Evaluating in that orientation makes the transform exactly
/// odd in `z0`.
fn orientation(zeta0: &[Complex64]) -> f64 {
    zeta0
        .iter()
        .map(|z| z.re)
        .chain(zeta0.iter().map(|z| z.im))
        .find(|v| *v != 0.0)
        .map_or(1.0, |v| v.signum())
}

/// Midpoint rule on cells of width `step` centred at `(i step, j step)`.
/// The cell at the origin integrates `1/(y_1 + i y_2)` to zero by symmetry
/// and is skipped.
pub fn cauchy_transform(
    source: &PlaneSource,
    zeta0: &[Complex64],
    points: &[Vec<f64>],
    step: f64,
    radius_factor: f64,
) -> Result<CauchyOutput> {
    let d = zeta0.len();
    if source.support.dim() != d {
        return config("support and z0 dimensions differ");
    }
    if !(step > 0.0) || !(radius_factor > 0.0) {
        return config("quadrature step and radius factor must be positive");
    }
    let sign = orientation(zeta0);
    let oriented: Vec<Complex64> = zeta0.iter().map(|z| z * sign).collect();
    let (re, im) = plane_frame(&oriented)?;
    let lower = &source.support.lower;
    let upper = &source.support.upper;
    let center = source.support.center();
    let half_diag = 0.5 * source.support.diameter();
    let radius = radius_factor * source.support.diameter();
    let sup_f = support_sup(source, step);

    let per_point: Vec<(Complex64, f64, usize)> = points
        .par_iter()
        .map(|x| {
            // Plane coordinates of the support centre seen from x.
            let rel: Vec<f64> = x.iter().zip(&center).map(|(a, c)| a - c).collect();
            let y1c: f64 = rel.iter().zip(&re).map(|(r, e)| r * e).sum();
            let y2c: f64 = rel.iter().zip(&im).map(|(r, e)| r * e).sum();
            let off = rel.iter().map(|r| r * r).sum::<f64>() - y1c * y1c - y2c * y2c;
            if off > half_diag * half_diag {
                return (Complex64::new(0.0, 0.0), 0.0, 0);
            }
            let i_lo = ((y1c - half_diag) / step).ceil() as i64;
            let i_hi = ((y1c + half_diag) / step).floor() as i64;
            let j_lo = ((y2c - half_diag) / step).ceil() as i64;
            let j_hi = ((y2c + half_diag) / step).floor() as i64;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut cells = 0;
            let mut outside = 0usize;
            let mut xs = vec![0.0; d];
            for j in j_lo..=j_hi {
                let y2 = j as f64 * step;
                for i in i_lo..=i_hi {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let y1 = i as f64 * step;
                    let mut inside = true;
                    for a in 0..d {
                        xs[a] = x[a] - (y1 * re[a] + y2 * im[a]);
                        inside &= xs[a] >= lower[a] && xs[a] <= upper[a];
                    }
                    if !inside {
                        continue;
                    }
                    if y1 * y1 + y2 * y2 > radius * radius {
                        outside += 1;
                        continue;
                    }
                    cells += 1;
                    acc += (source.f)(&xs) / Complex64::new(y1, y2);
                }
            }
            let tail = if outside > 0 {
                sup_f * outside as f64 * step * step / (2.0 * PI * radius)
            } else {
                0.0
            };
            (acc * (step * step / (2.0 * PI)) * sign, tail, cells)
        })
        .collect();

    let tail_bound = per_point.iter().map(|p| p.1).fold(0.0, f64::max);
    if tail_bound > 0.0 {
        log::warn!("source support leaves the truncation disk; tail bound {tail_bound:.3e}");
    }
    Ok(CauchyOutput {
        values: per_point.iter().map(|p| p.0).collect(),
        tail_bound,
        cells: per_point.iter().map(|p| p.2).sum(),
    })
}

/// Sampled sup of `|f|` over the support box.
fn support_sup(source: &PlaneSource, step: f64) -> f64 {
    let d = source.support.dim();
    let counts: Vec<usize> = (0..d)
        .map(|a| (((source.support.upper[a] - source.support.lower[a]) / step).ceil() as usize).clamp(1, 64) + 1)
        .collect();
    let total: usize = counts.iter().product();
    (0..total)
        .map(|mut k| {
            let x: Vec<f64> = (0..d)
                .map(|a| {
                    let i = k % counts[a];
                    k /= counts[a];
                    let t = i as f64 / (counts[a] - 1) as f64;
                    source.support.lower[a] + t * (source.support.upper[a] - source.support.lower[a])
                })
                .collect();
            (source.f)(&x).norm()
        })
        .fold(0.0, f64::max)
}

/// Transform evaluated at every node of `grid`.
pub fn cauchy_on_grid(
    source: &PlaneSource,
    zeta0: &[Complex64],
    grid: &Arc<Grid>,
    params: &CauchyParams,
) -> Result<(ComplexField, f64)> {
    let d = grid.dim();
    let points: Vec<Vec<f64>> = (0..grid.len()).map(|n| grid.coord(n)[..d].to_vec()).collect();
    let min_h = grid.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
    let out = cauchy_transform(source, zeta0, &points, params.step_factor * min_h, params.radius_factor)?;
    Ok((NodeField::from_raw(grid.clone(), out.values), out.tail_bound))
}

/// Multilinear interpolation of a node field; `None` outside the grid box.
pub fn interpolate<T: FieldValue>(field: &NodeField<T>, x: &[f64]) -> Option<T> {
    let grid = field.grid();
    let d = grid.dim();
    let dom = grid.domain();
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for a in 0..d {
        if !(x[a] >= dom.lower[a] && x[a] <= dom.upper[a]) {
            return None;
        }
        let t = (x[a] - dom.lower[a]) / grid.spacing()[a];
        let i = (t.floor() as usize).min(grid.shape()[a] - 2);
        base[a] = i;
        frac[a] = t - i as f64;
    }
    let mut acc = T::zero();
    for corner in 0..1usize << d {
        let mut w = 1.0;
        let mut node = 0;
        for a in 0..d {
            let up = corner >> a & 1 == 1;
            w *= if up { frac[a] } else { 1.0 - frac[a] };
            node += (base[a] + up as usize) * grid.stride(a);
        }
        if w != 0.0 {
            acc += field.get(node) * w;
        }
    }
    Some(acc)
}

/// Smallest grid-aligned box holding every node where `field` is nonzero,
/// widened by one cell and clipped to the grid. `None` when the field
/// vanishes.
pub fn support_box<T: FieldValue>(field: &NodeField<T>) -> Option<Domain> {
    let grid = field.grid();
    let d = grid.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for node in 0..grid.len() {
        if field.get(node) != T::zero() {
            let x = grid.coord(node);
            for a in 0..d {
                lo[a] = lo[a].min(x[a]);
                hi[a] = hi[a].max(x[a]);
            }
        }
    }
    if lo[0] > hi[0] {
        return None;
    }
    let dom = grid.domain();
    for a in 0..d {
        lo[a] = (lo[a] - grid.spacing()[a]).max(dom.lower[a]);
        hi[a] = (hi[a] + grid.spacing()[a]).min(dom.upper[a]);
        if !(hi[a] > lo[a]) {
            hi[a] = (lo[a] + grid.spacing()[a]).min(dom.upper[a]);
            lo[a] = hi[a] - grid.spacing()[a];
        }
    }
    Domain::new(&lo, &hi).ok()
}

/// Relative L2 error of `(z0 . grad) N f - f` on `grid` for the reference
/// Gaussian `f = exp(-|x - x_c|^2 / 0.09)`, with the gradient taken by
/// finite differences. The source is cut off at twice the grid box.
pub fn gaussian_inversion_error(grid: &Arc<Grid>, zeta0: &[Complex64], params: &CauchyParams) -> Result<f64> {
    let d = grid.dim();
    if zeta0.len() != d {
        return config("zeta0 dimension differs from the grid");
    }
    let center: Vec<f64> = [0.1, -0.05, 0.08][..d].to_vec();
    let f = |x: &[f64]| {
        let r2: f64 = x.iter().zip(&center).map(|(a, c)| (a - c).powi(2)).sum();
        Complex64::new((-r2 / 0.09).exp(), 0.0)
    };
    let dom = grid.domain();
    let support = Domain::new(
        &dom.lower.iter().map(|l| 2.0 * l).collect::<Vec<_>>(),
        &dom.upper.iter().map(|u| 2.0 * u).collect::<Vec<_>>(),
    )?;
    let src = PlaneSource { support, f: &f };
    let (g, _) = cauchy_on_grid(&src, zeta0, grid, params)?;
    let grad = gradient_fd(&g);
    let applied = NodeField::from_raw(
        grid.clone(),
        (0..grid.len())
            .map(|k| (0..d).map(|a| zeta0[a] * grad[k][a]).sum::<Complex64>())
            .collect(),
    );
    let exact = ComplexField::from_fn(grid.clone(), |x| f(&x[..d]));
    Ok(l2_norm(&applied.zip_with(&exact, |a, b| a - b)) / l2_norm(&exact))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), n).unwrap())
    }

    fn z0() -> Vec<Complex64> {
        let t: f64 = 0.4;
        vec![Complex64::new(t.cos(), -t.sin()), Complex64::new(t.sin(), t.cos())]
    }

    #[test]
    fn gaussian_is_recovered_and_improves() {
        let e1 = gaussian_inversion_error(&grid(33), &z0(), &CauchyParams::default()).unwrap();
        let e2 = gaussian_inversion_error(&grid(65), &z0(), &CauchyParams::default()).unwrap();
        assert!(e2 <= 0.01, "{e1} {e2}");
        assert!(e2 < e1, "{e1} {e2}");
    }

    /// For compactly supported `g` the transform of `(z0 . grad) g` is `g`.
    #[test]
    fn inverts_directional_derivative_of_a_bump() {
        let z = z0();
        let bump = |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 < 0.36 {
                (1.0 - r2 / 0.36).powi(4)
            } else {
                0.0
            }
        };
        let dbump = |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 < 0.36 {
                let s = -8.0 / 0.36 * (1.0 - r2 / 0.36).powi(3);
                (z[0] * x[0] + z[1] * x[1]) * s
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let src = PlaneSource {
            support: Domain::cube(2, 0.6).unwrap(),
            f: &dbump,
        };
        let points: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![0.2, -0.1], vec![-0.3, 0.25], vec![0.9, 0.0]];
        let out = cauchy_transform(&src, &z, &points, 0.005, 3.0).unwrap();
        for (p, v) in points.iter().zip(&out.values) {
            assert!((v - bump(p)).norm() < 2e-3, "{p:?}: {v} vs {}", bump(p));
        }
        assert_eq!(out.tail_bound, 0.0);
    }

    #[test]
    fn odd_in_z0_bitwise() {
        let f = |x: &[f64]| Complex64::new((x[0] - 0.3 * x[1]).cos(), x[0] * x[1]);
        let src = PlaneSource {
            support: Domain::cube(2, 0.8).unwrap(),
            f: &f,
        };
        let z = z0();
        let neg: Vec<Complex64> = z.iter().map(|v| -v).collect();
        let points: Vec<Vec<f64>> = vec![vec![0.1, 0.2], vec![-0.5, 0.7]];
        let a = cauchy_transform(&src, &z, &points, 0.02, 3.0).unwrap();
        let b = cauchy_transform(&src, &neg, &points, 0.02, 3.0).unwrap();
        for (p, q) in a.values.iter().zip(&b.values) {
            assert_eq!(*p, -q);
        }
    }

    #[test]
    fn tail_is_reported_when_truncated() {
        let f = |_: &[f64]| Complex64::new(1.0, 0.0);
        let src = PlaneSource {
            support: Domain::cube(2, 1.0).unwrap(),
            f: &f,
        };
        let out = cauchy_transform(&src, &z0(), &[vec![0.0, 0.0]], 0.05, 0.2).unwrap();
        assert!(out.tail_bound > 0.0);
    }

    #[test]
    fn non_orthonormal_direction_is_rejected() {
        let f = |_: &[f64]| Complex64::new(1.0, 0.0);
        let src = PlaneSource {
            support: Domain::cube(2, 1.0).unwrap(),
            f: &f,
        };
        let bad = vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0)];
        assert!(cauchy_transform(&src, &bad, &[vec![0.0, 0.0]], 0.05, 3.0).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_multilinear_fields() {
        let grid = Arc::new(Grid::uniform(Domain::cube(3, 1.0).unwrap(), 9).unwrap());
        let f = NodeField::from_fn(grid, |x| 1.0 + x[0] - 2.0 * x[1] * x[2] + x[0] * x[1] * x[2]);
        for p in [[0.13, -0.77, 0.5], [1.0, 1.0, -1.0], [-0.99, 0.01, 0.33]] {
            let exact = 1.0 + p[0] - 2.0 * p[1] * p[2] + p[0] * p[1] * p[2];
            assert!((interpolate(&f, &p).unwrap() - exact).abs() < 1e-14);
        }
        assert!(interpolate(&f, &[1.1, 0.0, 0.0]).is_none());
    }
}
