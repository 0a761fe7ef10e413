//! Recovery of the third normal derivative `d_n^3 c(x', 0)` from second
//! divided differences of the DN map, probed with pairs of CGO solutions.
//!
//! For boundary data `f1, f2` with first linearizations `v1, v2`,
//!
//! ```text
//! int_dOmega v0 d_nu (D^2 u)(f1, f2) dS = int_Omega g v1 v2 dx',
//! g = v0 (n-1)/(2 c) d_n^3 c.
//! ```
//!
//! With `v1 v2 ~ e^{i x.xi}` the left side is Fourier data of `g`, which is
//! inverted onto a truncated Fourier basis and divided by the known weight.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tikhonov::{solve_discrepancy, TikhonovReport};
use crate::cgo::{cgo_pair, ideal_fourier, CauchyParams};
use crate::error::config;
use crate::forward::{surrogate_norm, ForwardSolver};
use crate::grid::quadrature::l2_norm;
use crate::grid::{integrate_boundary, integrate_interior, BoundaryField, ComplexBoundaryField, Grid, NodeField, ScalarField};
use crate::linearization::{adjoint_solution, divided_differences, third_normal, EpsilonSchedule, LinearizedOperator};
use crate::Result;

/// Safety factor on the `h^2 + eps^2` part of the constants-probe budget.
pub const BUDGET_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryParams {
    /// Amplitude levels of the divided differences; the last two feed a
    /// Richardson step that also estimates the truncation error.
    pub eps: Vec<f64>,
    pub xi_radius: f64,
    pub xi_step: f64,
    /// Largest angular frequency of the reconstruction basis, defaults to
    /// `xi_radius`.
    pub basis_radius: Option<f64>,
    /// Semiclassical parameter of the CGO pairs.
    pub h: f64,
    /// Frequencies whose CGO relative remainder exceeds this are excluded.
    pub max_remainder: f64,
    /// Residual target of the regularization, in units of the noise norm.
    pub tau: f64,
    /// Radius of the frequency band used for the Fourier-coefficient check.
    pub check_radius: f64,
    pub cauchy: CauchyParams,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        RecoveryParams {
            eps: vec![0.02, 0.01],
            xi_radius: 4.0 * PI,
            xi_step: PI,
            basis_radius: None,
            h: 0.15,
            max_remainder: 0.5,
            tau: 1.0,
            check_radius: 4.0,
            cauchy: CauchyParams::default(),
        }
    }
}

impl RecoveryParams {
    pub fn basis_radius(&self) -> f64 {
        self.basis_radius.unwrap_or(self.xi_radius)
    }

    pub fn validate(&self, amplitude_bound: f64) -> Result<()> {
        if self.eps.len() < 2 {
            return config("recovery needs at least two epsilon levels");
        }
        EpsilonSchedule {
            levels: self.eps.clone(),
            weights: Vec::new(),
        }
        .validate(&[], amplitude_bound)?;
        // Two unit-norm directions per stencil point.
        if 2.0 * self.eps[0] > amplitude_bound {
            return config(format!(
                "largest stencil amplitude {:.3e} exceeds the small-data bound {amplitude_bound:.3e}",
                2.0 * self.eps[0]
            ));
        }
        if !(self.xi_radius >= 0.0) || !(self.xi_step > 0.0) {
            return config("xi grid needs a non-negative radius and a positive step");
        }
        if !(self.h > 0.0) {
            return config("CGO parameter h must be positive");
        }
        if self.h * self.xi_radius >= 2.0 {
            return config(format!(
                "h |xi| = {:.3} must stay below 2 over the xi grid",
                self.h * self.xi_radius
            ));
        }
        if !(self.tau > 0.0) || !(self.max_remainder > 0.0) {
            return config("tau and max_remainder must be positive");
        }
        Ok(())
    }
}

/// Lattice `step * Z^d` inside the ball of `radius`, ordered by norm and
/// then lexicographically.
pub fn xi_lattice(d: usize, radius: f64, step: f64) -> Vec<Vec<f64>> {
    let kmax = (radius / step).floor() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-kmax; d];
    loop {
        let xi: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
        if xi.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius * (1.0 + 1e-12) {
            out.push(xi);
        }
        let mut a = 0;
        loop {
            if a == d {
                sort_frequencies(&mut out);
                return out;
            }
            idx[a] += 1;
            if idx[a] <= kmax {
                break;
            }
            idx[a] = -kmax;
            a += 1;
        }
    }
}

fn sort_frequencies(xs: &mut [Vec<f64>]) {
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    xs.sort_by(|a, b| norm(a).total_cmp(&norm(b)).then_with(|| a.partial_cmp(b).unwrap()));
}

/// Representative of `{xi, -xi}`: the first nonzero component is positive.
pub fn is_canonical(xi: &[f64]) -> bool {
    match xi.iter().find(|v| **v != 0.0) {
        Some(v) => *v > 0.0,
        None => true,
    }
}

/// `B(f1, f2) = int_dOmega v0 d_nu D^2 u(f1, f2) dS` after Richardson
/// extrapolation in `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: Complex64,
    /// Values at the two finest levels, before extrapolation.
    pub coarse: Complex64,
    pub fine: Complex64,
    /// `|fine - coarse| / (q^2 - 1)`, the estimated error at the finest level.
    pub truncation: f64,
    /// Solver floor `residual / eps^2` carried through the boundary integral,
    /// with the largest final Newton residual of the stencil.
    pub floor: f64,
    pub solves: usize,
}

fn split(f: &ComplexBoundaryField) -> Vec<(BoundaryField, Complex64)> {
    let mut out = Vec::new();
    for (part, unit) in [(f.re(), Complex64::new(1.0, 0.0)), (f.im(), Complex64::new(0.0, 1.0))] {
        if part.sup_norm() > 0.0 {
            out.push((part, unit));
        }
    }
    out
}

/// Evaluates the boundary functional on complex data by bilinearity:
/// up to four real mixed divided differences.
pub fn boundary_functional(
    solver: &ForwardSolver,
    f1: &ComplexBoundaryField,
    f2: &ComplexBoundaryField,
    eps: &[f64],
) -> Result<FunctionalValue> {
    if eps.len() < 2 {
        return config("Richardson extrapolation needs two levels");
    }
    let op = solver.operator();
    let v0 = adjoint_solution(op).trace();
    let weight_mass = integrate_boundary(&v0);
    let (p1, p2) = (split(f1), split(f2));
    let pairs: Vec<_> = p1.iter().flat_map(|a| p2.iter().map(move |b| (a, b))).collect();
    let k = eps.len();
    let terms = pairs
        .par_iter()
        .map(|((a, ua), (b, ub))| {
            let (na, nb) = (surrogate_norm(a), surrogate_norm(b));
            let schedule = EpsilonSchedule {
                levels: eps.to_vec(),
                weights: vec![1.0 / na, 1.0 / nb],
            };
            let dds = divided_differences(solver, &[a.clone(), b.clone()], &schedule)?;
            let unit = ua * ub;
            let vals: Vec<Complex64> = dds[k - 2..]
                .iter()
                .map(|dd| unit * integrate_boundary(&dd.dn.zip_with(&v0, |x, w| x * w)))
                .collect();
            let residual = dds.iter().map(|dd| dd.max_residual).fold(0.0, f64::max);
            let floor = na * nb * residual / (eps[k - 1] * eps[k - 1]) * weight_mass / op.grid().h();
            let solves: usize = dds.iter().map(|dd| dd.solves).sum();
            Ok((vals[0], vals[1], floor, solves))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coarse = Complex64::new(0.0, 0.0);
    let mut fine = Complex64::new(0.0, 0.0);
    let mut floor = 0.0;
    let mut solves = 0;
    for (c, f, fl, s) in terms {
        coarse += c;
        fine += f;
        floor += fl;
        solves += s;
    }
    let q2 = (eps[k - 2] / eps[k - 1]).powi(2);
    Ok(FunctionalValue {
        value: (fine * q2 - coarse) / (q2 - 1.0),
        coarse,
        fine,
        truncation: (fine - coarse).norm() / (q2 - 1.0),
        floor,
        solves,
    })
}

/// `v0 (n-1)/(2c)`, the known factor in front of `d_n^3 c`.
pub fn recovery_weight(op: &LinearizedOperator) -> ScalarField {
    let k = (op.factor().dim() as f64 - 1.0) / 2.0;
    let v0 = adjoint_solution(op);
    v0.zip_with(&NodeField::from_raw(op.grid().clone(), op.gamma().to_vec()), |v, c| v * k / c)
}

/// Ground truth `g = weight * d_n^3 c`.
pub fn weighted_truth(op: &LinearizedOperator) -> ScalarField {
    recovery_weight(op).zip_with(&third_normal(op), |w, d| w * d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsProbe {
    pub boundary: f64,
    /// `int_Omega g dx'` by the grid quadrature.
    pub interior: f64,
    pub truncation: f64,
    pub floor: f64,
    pub error: f64,
    /// `BUDGET_FACTOR (h^2 + eps^2) int |g| + floor`.
    pub budget: f64,
}

/// Probe with `v1 = v2 = 1`, whose boundary data is the constant 1.
pub fn constants_probe(solver: &ForwardSolver, eps: &[f64]) -> Result<ConstantsProbe> {
    let op = solver.operator();
    let one = ComplexBoundaryField::from_fn(op.grid().clone(), |_| Complex64::new(1.0, 0.0));
    let fv = boundary_functional(solver, &one, &one, eps)?;
    let g = weighted_truth(op);
    let interior = integrate_interior(&g);
    let mass = integrate_interior(&g.map(f64::abs));
    let h = op.grid().h();
    let e = eps[eps.len() - 1];
    Ok(ConstantsProbe {
        boundary: fv.value.re,
        interior,
        truncation: fv.truncation,
        floor: fv.floor,
        error: (fv.value.re - interior).abs(),
        budget: BUDGET_FACTOR * (h * h + e * e) * mass + fv.floor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub xi: Vec<f64>,
    /// Boundary functional, approximate Fourier data of `g` at `xi`.
    pub value: Complex64,
    /// `int g e^{i x.xi}` of the ground truth by the grid quadrature.
    pub exact: Complex64,
    /// Fourier transform of the reconstruction at `xi`.
    pub model: Complex64,
    pub remainders: [f64; 2],
    /// Richardson truncation estimate.
    pub truncation: f64,
    pub floor: f64,
    /// `|v1 v2 - e^{i x.xi}|` integrated against `|value| / |Omega|`.
    pub product_defect: f64,
    /// Noise level used by the discrepancy principle: truncation, product
    /// defect and CGO remainders. The a-priori `floor` is reported only, it
    /// bounds the solver contribution far above what Newton leaves behind.
    pub noise: f64,
    /// True for rows obtained from `-xi` by conjugation.
    pub mirrored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub xi: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryErrors {
    /// Relative L2 error against the band-limited projection of the truth.
    pub truncated: Option<f64>,
    /// Relative L2 error against the full truth.
    pub full: Option<f64>,
    /// Absolute L2 norm of the reconstruction, used when the truth vanishes.
    pub recovered_norm: f64,
    /// Largest relative error of the raw Fourier data with `|xi| <= check_radius`.
    pub fourier_data: Option<f64>,
    /// Same for the Fourier transform of the reconstruction.
    pub fourier_model: Option<f64>,
    /// `|noise| / |data|`, the relative floor of the data.
    pub data_floor: f64,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub rows: Vec<RecoveryRow>,
    pub excluded: Vec<Exclusion>,
    pub modes: Vec<Vec<f64>>,
    pub coefficients: Vec<Complex64>,
    pub tikhonov: TikhonovReport,
    /// Recovered `d_n^3 c(x', 0)`.
    pub field: ScalarField,
    pub truth: ScalarField,
    /// Band-limited projection of the truth, in the same units.
    pub truncated_truth: ScalarField,
    pub errors: RecoveryErrors,
    pub solves: usize,
}

/// Angular frequencies `2 pi k / L` of the periodic basis on the box.
pub fn basis_modes(grid: &Grid, radius: f64) -> Vec<Vec<f64>> {
    let dom = grid.domain();
    let d = grid.dim();
    let len: Vec<f64> = (0..d).map(|a| dom.upper[a] - dom.lower[a]).collect();
    let kmax: Vec<i64> = len.iter().map(|l| (radius * l / (2.0 * PI)).floor() as i64).collect();
    let mut out = Vec::new();
    let mut idx: Vec<i64> = kmax.iter().map(|k| -k).collect();
    loop {
        let w: Vec<f64> = (0..d).map(|a| 2.0 * PI * idx[a] as f64 / len[a]).collect();
        if w.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius * (1.0 + 1e-12) {
            out.push(w);
        }
        let mut a = 0;
        loop {
            if a == d {
                sort_frequencies(&mut out);
                return out;
            }
            idx[a] += 1;
            if idx[a] <= kmax[a] {
                break;
            }
            idx[a] = -kmax[a];
            a += 1;
        }
    }
}

/// `int_l^u e^{i w x} dx`.
fn segment(w: f64, l: f64, u: f64) -> Complex64 {
    if w.abs() * (u - l) < 1e-8 {
        return Complex64::new(u - l, 0.5 * w * (u * u - l * l));
    }
    (Complex64::from_polar(1.0, w * u) - Complex64::from_polar(1.0, w * l)) / Complex64::new(0.0, w)
}

/// `int_Omega e^{i x.xi} e^{i x.w} dx'` over the box.
pub fn box_fourier(grid: &Grid, xi: &[f64], w: &[f64]) -> Complex64 {
    let dom = grid.domain();
    (0..grid.dim())
        .map(|a| segment(xi[a] + w[a], dom.lower[a], dom.upper[a]))
        .product()
}

fn evaluate_modes(grid: &std::sync::Arc<Grid>, modes: &[Vec<f64>], coef: &[Complex64]) -> ScalarField {
    let d = grid.dim();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let x = grid.coord(n);
            modes
                .iter()
                .zip(coef)
                .map(|(w, c)| (c * Complex64::from_polar(1.0, (0..d).map(|a| w[a] * x[a]).sum())).re)
                .sum()
        })
        .collect();
    NodeField::from_raw(grid.clone(), values)
}

fn relative(err: f64, scale: f64) -> Option<f64> {
    (scale > 0.0).then(|| err / scale)
}

/// Runs the full recovery on the factor of `solver`. The factor also
/// provides the ground truth the errors are measured against.
pub fn recover_d3c(solver: &ForwardSolver, params: &RecoveryParams) -> Result<Recovery> {
    let op = solver.operator();
    let grid = op.grid().clone();
    let d = grid.dim();
    params.validate(solver.config().amplitude_bound)?;
    let measure = integrate_interior(&ScalarField::from_fn(grid.clone(), |_| 1.0));

    let xis: Vec<Vec<f64>> = xi_lattice(d, params.xi_radius, params.xi_step)
        .into_iter()
        .filter(|xi| is_canonical(xi))
        .collect();
    let g = weighted_truth(op);
    let probed: Vec<std::result::Result<(RecoveryRow, usize), Exclusion>> = xis
        .par_iter()
        .map(|xi| {
            let exclude = |reason: String| Exclusion { xi: xi.clone(), reason };
            let pair = cgo_pair(op, xi, params.h, &params.cauchy).map_err(|e| exclude(e.to_string()))?;
            let (f1, f2, remainders, product) = match &pair {
                None => {
                    let one = ComplexBoundaryField::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0));
                    (one.clone(), one, [0.0; 2], None)
                }
                Some((a, b)) => (a.trace.clone(), b.trace.clone(), [a.relative_remainder, b.relative_remainder], Some((a, b))),
            };
            let worst = remainders[0].max(remainders[1]);
            if !(worst <= params.max_remainder) {
                return Err(exclude(format!(
                    "CGO relative remainder {worst:.3e} exceeds {:.3e}",
                    params.max_remainder
                )));
            }
            let fv = boundary_functional(solver, &f1, &f2, &params.eps).map_err(|e| exclude(e.to_string()))?;
            if !fv.value.is_finite() {
                return Err(exclude("non-finite boundary functional".into()));
            }
            let product_defect = match product {
                None => 0.0,
                Some((a, b)) => {
                    let defect = a.interior.zip_with(&b.interior, |p, q| p * q);
                    let defect = NodeField::from_raw(
                        grid.clone(),
                        (0..grid.len())
                            .map(|n| {
                                let x = grid.coord(n);
                                let ph: f64 = (0..d).map(|k| x[k] * xi[k]).sum();
                                (defect.get(n) - Complex64::from_polar(1.0, ph)).norm()
                            })
                            .collect(),
                    );
                    integrate_interior(&defect) / measure * fv.value.norm()
                }
            };
            let remainder = (remainders[0] + remainders[1]) * fv.value.norm();
            let noise = fv.truncation + product_defect + remainder;
            Ok((
                RecoveryRow {
                    xi: xi.clone(),
                    value: fv.value,
                    exact: ideal_fourier(&g, xi),
                    model: Complex64::new(0.0, 0.0),
                    remainders,
                    truncation: fv.truncation,
                    floor: fv.floor,
                    product_defect,
                    noise,
                    mirrored: false,
                },
                fv.solves,
            ))
        })
        .collect();

    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    let mut solves = 0;
    for p in probed {
        match p {
            Ok((row, s)) => {
                solves += s;
                if row.xi.iter().any(|v| *v != 0.0) {
                    let mut m = row.clone();
                    m.xi = row.xi.iter().map(|v| -v).collect();
                    m.value = row.value.conj();
                    m.exact = row.exact.conj();
                    m.mirrored = true;
                    rows.push(row);
                    rows.push(m);
                } else {
                    rows.push(row);
                }
            }
            Err(e) => {
                log::warn!("excluding xi = {:?}: {}", e.xi, e.reason);
                excluded.push(e);
            }
        }
    }
    if rows.is_empty() {
        return config("every frequency was excluded; see the exclusion audit");
    }

    let modes = basis_modes(&grid, params.basis_radius());
    let a = DMatrix::from_fn(rows.len(), modes.len(), |i, j| box_fourier(&grid, &rows[i].xi, &modes[j]));
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.value));
    let noise: Vec<f64> = rows.iter().map(|r| r.noise).collect();
    let sol = solve_discrepancy(&a, &b, &noise, params.tau)?;
    let model = &a * &sol.x;
    for (row, m) in rows.iter_mut().zip(model.iter()) {
        row.model = *m;
    }
    let coefficients: Vec<Complex64> = sol.x.iter().copied().collect();

    let weight = recovery_weight(op);
    let g_rec = evaluate_modes(&grid, &modes, &coefficients);
    let field = g_rec.zip_with(&weight, |v, w| v / w);
    let truth = third_normal(op);
    // Orthogonal projection onto the basis: coefficients `int g e^{-i w x} / |Omega|`.
    let proj: Vec<Complex64> = modes
        .iter()
        .map(|w| {
            let neg: Vec<f64> = w.iter().map(|v| -v).collect();
            ideal_fourier(&g, &neg) / measure
        })
        .collect();
    let truncated_truth = evaluate_modes(&grid, &modes, &proj).zip_with(&weight, |v, w| v / w);

    let diff = |p: &ScalarField, q: &ScalarField| l2_norm(&p.zip_with(q, |x, y| x - y));
    let band: Vec<&RecoveryRow> = rows
        .iter()
        .filter(|r| r.xi.iter().map(|v| v * v).sum::<f64>().sqrt() <= params.check_radius * (1.0 + 1e-12))
        .collect();
    let worst = |f: &dyn Fn(&RecoveryRow) -> Complex64| -> Option<f64> {
        band.iter()
            .map(|r| relative((f(r) - r.exact).norm(), r.exact.norm()))
            .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)))
            .filter(|_| !band.is_empty())
    };
    let data_norm = b.norm();
    let errors = RecoveryErrors {
        truncated: relative(diff(&field, &truncated_truth), l2_norm(&truncated_truth)),
        full: relative(diff(&field, &truth), l2_norm(&truth)),
        recovered_norm: l2_norm(&field),
        fourier_data: worst(&|r| r.value),
        fourier_model: worst(&|r| r.model),
        data_floor: if data_norm > 0.0 {
            noise.iter().map(|e| e * e).sum::<f64>().sqrt() / data_norm
        } else {
            0.0
        },
    };
    Ok(Recovery {
        rows,
        excluded,
        modes,
        coefficients,
        tikhonov: sol.report,
        field,
        truth,
        truncated_truth,
        errors,
        solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::NewtonConfig;
    use crate::geometry::ScenarioSpec;
    use crate::grid::Domain;
    use std::sync::Arc;

    fn solver(id: &str, n: usize) -> ForwardSolver {
        let c = Arc::new(ScenarioSpec::new(id, 3).build().unwrap());
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), n).unwrap());
        ForwardSolver::new(c, g, NewtonConfig::default()).unwrap()
    }

    #[test]
    fn lattice_is_symmetric_and_bounded() {
        let xs = xi_lattice(2, 2.0, 1.0);
        assert_eq!(xs.len(), 13);
        assert_eq!(xs[0], vec![0.0, 0.0]);
        for x in &xs {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            assert!(xs.contains(&neg));
        }
        assert_eq!(xs.iter().filter(|x| is_canonical(x)).count(), 7);
    }

    #[test]
    fn box_fourier_matches_midpoint_rule() {
        let g = Grid::uniform(Domain::new(&[-1.0, -0.5], &[1.0, 1.5]).unwrap(), 9).unwrap();
        let (xi, w) = ([1.3, -0.4], [PI, 0.0]);
        let m = 800;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m {
            for i in 0..m {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / m as f64;
                let y = -0.5 + 2.0 * (j as f64 + 0.5) / m as f64;
                acc += Complex64::from_polar(1.0, (xi[0] + w[0]) * x + (xi[1] + w[1]) * y) * (4.0 / (m * m) as f64);
            }
        }
        assert!((box_fourier(&g, &xi, &w) - acc).norm() < 1e-5);
        assert!((box_fourier(&g, &[0.0, 0.0], &[0.0, 0.0]) - Complex64::new(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn flat_scenario_recovers_zero() {
        let s = solver("flat", 17);
        let p = RecoveryParams {
            xi_radius: 2.0 * PI,
            ..Default::default()
        };
        let r = recover_d3c(&s, &p).unwrap();
        assert!(r.excluded.is_empty());
        assert!(r.errors.truncated.is_none());
        assert!(r.errors.recovered_norm < 1e-6, "{:?}", r.errors);
    }

    #[test]
    fn constants_probe_is_within_budget() {
        let s = solver("bump-cubic", 33);
        let p = constants_probe(&s, &[0.02, 0.01]).unwrap();
        assert!(p.error <= p.budget, "{p:?}");
        assert!(p.interior.abs() > 0.1);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad = RecoveryParams {
            eps: vec![0.03, 0.015],
            ..Default::default()
        };
        assert!(bad.validate(0.05).is_err());
        let bad = RecoveryParams {
            h: 0.6,
            ..Default::default()
        };
        assert!(bad.validate(0.05).is_err());
        assert!(RecoveryParams::default().validate(0.05).is_ok());
    }
}
