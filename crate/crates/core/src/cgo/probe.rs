//! Fourier probing with products of CGO pairs.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build::{build_cgo, CgoSolution};
use super::cauchy::CauchyParams;
use super::zeta::make_zeta_pair;
use crate::error::config;
use crate::grid::{integrate_interior, NodeField, ScalarField};
use crate::linearization::LinearizedOperator;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub xi: Vec<f64>,
    /// `int target v1 v2`.
    pub value: Complex64,
    /// `int target e^{i x . xi}`.
    pub ideal: Complex64,
    /// Relative remainders of the two members, zero for `xi = 0`.
    pub remainders: [f64; 2],
}

/// `int_Omega target e^{i x . xi} dx` by the grid quadrature.
pub fn ideal_fourier(target: &ScalarField, xi: &[f64]) -> Complex64 {
    let grid = target.grid();
    let d = grid.dim();
    let vals = (0..grid.len())
        .map(|n| {
            let x = grid.coord(n);
            let phase: f64 = (0..d).map(|a| x[a] * xi[a]).sum();
            Complex64::from_polar(target.get(n), phase)
        })
        .collect();
    integrate_interior(&NodeField::from_raw(grid.clone(), vals))
}

/// Both members of the pair of `xi`; `None` for `xi = 0`, where the
/// constant solution takes their place.
pub fn cgo_pair(
    op: &LinearizedOperator,
    xi: &[f64],
    h: f64,
    params: &CauchyParams,
) -> Result<Option<(CgoSolution, CgoSolution)>> {
    if xi.iter().all(|v| *v == 0.0) {
        return Ok(None);
    }
    let pair = make_zeta_pair(xi, h, None)?;
    let (p1, p2) = pair.phases();
    Ok(Some((build_cgo(op, &p1, params)?, build_cgo(op, &p2, params)?)))
}

/// `int target v1 v2` for every frequency in `xis`.
pub fn fourier_probe(
    op: &LinearizedOperator,
    target: &ScalarField,
    xis: &[Vec<f64>],
    h: f64,
    params: &CauchyParams,
) -> Result<Vec<ProbeRow>> {
    if target.grid().as_ref() != op.grid().as_ref() {
        return config("probe target lives on a different grid");
    }
    xis.par_iter()
        .map(|xi| {
            if xi.len() != op.grid().dim() {
                return config(format!("frequency {xi:?} has the wrong dimension"));
            }
            let ideal = ideal_fourier(target, xi);
            let Some((a, b)) = cgo_pair(op, xi, h, params)? else {
                let value = Complex64::new(integrate_interior(target), 0.0);
                return Ok(ProbeRow {
                    xi: xi.clone(),
                    value,
                    ideal,
                    remainders: [0.0; 2],
                });
            };
            let product = a.interior.zip_with(&b.interior, |p, q| p * q);
            let value = integrate_interior(&product.zip_with(target, |p, t| p * t));
            Ok(ProbeRow {
                xi: xi.clone(),
                value,
                ideal,
                remainders: [a.relative_remainder, b.relative_remainder],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScenarioSpec;
    use crate::grid::{Domain, Grid};
    use std::sync::Arc;

    fn op(n: usize) -> LinearizedOperator {
        let c = Arc::new(ScenarioSpec::new("flat", 3).build().unwrap());
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), n).unwrap());
        LinearizedOperator::new(c, g).unwrap()
    }

    fn bump(g: &Arc<Grid>) -> ScalarField {
        ScalarField::from_fn(g.clone(), |x| {
            let r2 = (x[0] - 0.1).powi(2) + (x[1] + 0.2).powi(2);
            if r2 < 0.49 {
                (1.0 - r2 / 0.49).powi(4)
            } else {
                0.0
            }
        })
    }

    #[test]
    fn zero_target_gives_zero() {
        let o = op(17);
        let t = ScalarField::zeros(o.grid().clone());
        let rows = fourier_probe(&o, &t, &[vec![1.0, 2.0], vec![0.0, 0.0]], 0.3, &CauchyParams::default()).unwrap();
        assert!(rows.iter().all(|r| r.value == Complex64::new(0.0, 0.0)));
    }

    /// Flat space: the probe must converge to the oracle Fourier integral
    /// of the bump, computed by a fine independent midpoint rule.
    #[test]
    fn flat_probe_matches_direct_fourier_integral() {
        let xi = vec![2.0, -1.0];
        let oracle = {
            let m = 2000;
            let dx = 2.0 / m as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                for i in 0..m {
                    let x = -1.0 + (i as f64 + 0.5) * dx;
                    let y = -1.0 + (j as f64 + 0.5) * dx;
                    let r2 = (x - 0.1).powi(2) + (y + 0.2).powi(2);
                    if r2 < 0.49 {
                        acc += Complex64::from_polar((1.0 - r2 / 0.49).powi(4), 2.0 * x - y) * (dx * dx);
                    }
                }
            }
            acc
        };
        let err = |n: usize| {
            let o = op(n);
            let t = bump(o.grid());
            let rows = fourier_probe(&o, &t, &[xi.clone()], 0.5, &CauchyParams::default()).unwrap();
            (rows[0].value - oracle).norm() / oracle.norm()
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e2 < 1e-2, "{e1} {e2}");
        assert!(e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn negated_frequency_is_conjugate() {
        let c = Arc::new(ScenarioSpec::new("graded-cubic", 3).build().unwrap());
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), 25).unwrap());
        let o = LinearizedOperator::new(c, g.clone()).unwrap();
        let t = bump(&g);
        let rows = fourier_probe(&o, &t, &[vec![1.5, 0.5], vec![-1.5, -0.5]], 0.5, &CauchyParams::default()).unwrap();
        let (p, q) = (rows[0].value, rows[1].value);
        assert!((p.conj() - q).norm() <= 1e-12 * p.norm(), "{p} {q}");
    }
}
