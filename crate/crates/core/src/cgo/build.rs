//! Complex geometrical optics solutions of the first linearization.
//!
//! The ideal solution `e^{x.zeta/h} e^{Phi}` is imposed as Dirichlet data
//! and the discrete boundary value problem is solved exactly, so the
//! interior field is a true discrete solution and the distance to the ideal
//! profile is measured rather than assumed.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cauchy::{cauchy_on_grid, interpolate, support_box, CauchyParams, PlaneSource};
use super::zeta::{make_zeta_pair, CgoPhase};
use crate::error::{config, domain};
use crate::grid::quadrature::l2_norm;
use crate::grid::{ComplexBoundaryField, ComplexField, NodeField};
use crate::linalg::ACCEPT_RESIDUAL;
use crate::linearization::LinearizedOperator;
use crate::Result;

/// Largest `|Re(x . zeta)/h|` accepted on the grid.
pub const MAX_EXPONENT: f64 = 600.0;

/// Largest `|rate_a| h_a` accepted; beyond it the grid cannot resolve the
/// exponential.
pub const MAX_RATE_PER_CELL: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CgoPath {
    /// Two-dimensional base: the phase is the gauge `-log(c)/2` that turns
    /// the operator into a Schroedinger operator with potential
    /// `q = Lap sqrt(c) / sqrt(c)`.
    Schrodinger,
    /// Three-dimensional base: `Phi = N(-zeta0 . b / 2)`.
    Magnetic,
}

impl CgoPath {
    pub fn for_dim(d: usize) -> Self {
        if d == 2 {
            CgoPath::Schrodinger
        } else {
            CgoPath::Magnetic
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgoSolution {
    pub zeta: Vec<Complex64>,
    pub zeta0: Vec<Complex64>,
    pub h: f64,
    /// Grid-corrected rate whose exponential is exactly discrete harmonic.
    pub rate: Vec<Complex64>,
    pub path: CgoPath,
    pub phi: ComplexField,
    pub trace: ComplexBoundaryField,
    pub interior: ComplexField,
    /// `|| e^{-x.zeta/h} interior - e^Phi ||_{L^2}`.
    pub remainder_norm: f64,
    /// `remainder_norm / || e^Phi ||_{L^2}`.
    pub relative_remainder: f64,
    pub solve_residual: f64,
}

/// `(2 / h_a) asinh(h_a k_a / 2)` per axis. The centred second difference
/// of `e^{x . r}` along axis `a` equals `k_a^2 e^{x . r}`, so `k . k = 0`
/// makes the exponential an exact null vector of the discrete Laplacian.
pub fn discrete_rate(rate: &[Complex64], spacing: &[f64]) -> Vec<Complex64> {
    rate.iter()
        .zip(spacing)
        .map(|(k, &h)| (k * (0.5 * h)).asinh() * (2.0 / h))
        .collect()
}

fn exponent(x: &[f64], rate: &[Complex64]) -> Complex64 {
    x.iter().zip(rate).map(|(a, r)| r * a).sum()
}

/// Correction phase on the operator's grid.
pub fn cgo_phase(
    op: &LinearizedOperator,
    zeta0: &[Complex64],
    path: CgoPath,
    params: &CauchyParams,
) -> Result<(ComplexField, f64)> {
    match path {
        CgoPath::Schrodinger => Ok((
            NodeField::from_raw(
                op.grid().clone(),
                op.gamma().iter().map(|g| Complex64::new(-0.5 * g.ln(), 0.0)).collect(),
            ),
            0.0,
        )),
        CgoPath::Magnetic => magnetic_phase(op, zeta0, params),
    }
}

/// `Phi = N_{zeta0}(-zeta0 . b / 2)` with `b` extended by zero outside the
/// grid box and interpolated multilinearly inside it.
pub fn magnetic_phase(op: &LinearizedOperator, zeta0: &[Complex64], params: &CauchyParams) -> Result<(ComplexField, f64)> {
    let grid = op.grid();
    let d = grid.dim();
    if zeta0.len() != d {
        return config("zeta0 dimension differs from the grid");
    }
    let source = NodeField::from_raw(
        grid.clone(),
        op.convection()
            .iter()
            .map(|b| -0.5 * (0..d).map(|a| zeta0[a] * b[a]).sum::<Complex64>())
            .collect(),
    );
    let Some(support) = support_box(&source) else {
        return Ok((ComplexField::zeros(grid.clone()), 0.0));
    };
    let f = |x: &[f64]| interpolate(&source, x).unwrap_or(Complex64::new(0.0, 0.0));
    let plane = PlaneSource { support, f: &f };
    cauchy_on_grid(&plane, zeta0, grid, params)
}

/// Builds the solution for one phase, computing `Phi` from scratch.
pub fn build_cgo(op: &LinearizedOperator, phase: &CgoPhase, params: &CauchyParams) -> Result<CgoSolution> {
    let path = CgoPath::for_dim(op.grid().dim());
    let (phi, _) = cgo_phase(op, &phase.zeta0, path, params)?;
    build_cgo_with_phase(op, phase, path, &phi)
}

/// Builds the solution with a precomputed correction phase.
pub fn build_cgo_with_phase(
    op: &LinearizedOperator,
    phase: &CgoPhase,
    path: CgoPath,
    phi: &ComplexField,
) -> Result<CgoSolution> {
    let grid = op.grid();
    let d = grid.dim();
    if phase.dim() != d {
        return config(format!("zeta has dimension {}, grid has {d}", phase.dim()));
    }
    for (k, h) in phase.rate.iter().zip(grid.spacing()) {
        if k.norm() * h > MAX_RATE_PER_CELL {
            return domain(format!(
                "h too small for grid: |zeta/h| h_grid = {:.3} exceeds {MAX_RATE_PER_CELL}",
                k.norm() * h
            ));
        }
    }
    let rate = discrete_rate(&phase.rate, grid.spacing());
    let exps: Vec<Complex64> = (0..grid.len()).map(|n| exponent(&grid.coord(n)[..d], &rate)).collect();
    let worst = exps.iter().map(|e| e.re.abs()).fold(0.0, f64::max);
    if worst > MAX_EXPONENT {
        return domain(format!("h too small for grid: exponent reaches {worst:.1}"));
    }
    let ideal = NodeField::from_raw(
        grid.clone(),
        exps.iter().zip(phi.values()).map(|(e, p)| (e + p).exp()).collect(),
    );
    let trace = ideal.trace();
    let problem = op.convection_problem()?;
    let (interior, stats) = problem.solve_complex(None, &trace)?;
    let rem = NodeField::from_raw(
        grid.clone(),
        (0..grid.len())
            .map(|n| interior.get(n) * (-exps[n]).exp() - phi.get(n).exp())
            .collect(),
    );
    let base = l2_norm(&phi.map(|p| p.exp()));
    let remainder_norm = l2_norm(&rem);
    Ok(CgoSolution {
        zeta: phase.zeta.clone(),
        zeta0: phase.zeta0.clone(),
        h: phase.h,
        rate,
        path,
        phi: phi.clone(),
        trace,
        interior,
        remainder_norm,
        relative_remainder: if base > 0.0 { remainder_norm / base } else { remainder_norm },
        solve_residual: stats.relative_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderRow {
    pub h: f64,
    pub remainder_norm: f64,
    pub relative_remainder: f64,
    /// `|| e^Phi ||_{L^2}`.
    pub phase_norm: f64,
    pub solve_residual: f64,
}

/// Remainders of the first member of the pair of `xi` over `hs`. The phase
/// depends on `zeta0` only and is computed once.
pub fn remainder_sweep(
    op: &LinearizedOperator,
    xi: &[f64],
    hs: &[f64],
    params: &CauchyParams,
) -> Result<Vec<RemainderRow>> {
    if hs.is_empty() {
        return Ok(Vec::new());
    }
    let path = CgoPath::for_dim(op.grid().dim());
    let first = make_zeta_pair(xi, hs[0], None)?;
    let (phi, _) = cgo_phase(op, &first.phases().0.zeta0, path, params)?;
    hs.par_iter()
        .map(|&h| {
            let pair = make_zeta_pair(xi, h, None)?;
            let s = build_cgo_with_phase(op, &pair.phases().0, path, &phi)?;
            Ok(RemainderRow {
                h,
                remainder_norm: s.remainder_norm,
                relative_remainder: s.relative_remainder,
                phase_norm: l2_norm(&phi.map(|p| p.exp())),
                solve_residual: s.solve_residual,
            })
        })
        .collect()
}

/// Rows ordered by decreasing `h`: each remainder may exceed its
/// predecessor only by `slack` (first step) or when both sit below the
/// solver floor.
pub fn remainder_non_increasing(rows: &[RemainderRow], slack: f64) -> bool {
    rows.windows(2).enumerate().all(|(k, w)| {
        let allowed = if k == 0 { 1.0 + slack } else { 1.0 };
        let floor = ACCEPT_RESIDUAL * w[1].phase_norm;
        w[1].remainder_norm <= allowed * w[0].remainder_norm || w[1].remainder_norm <= floor
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCancellation {
    /// `max |Phi(zeta0) + Phi(-zeta0)|` with both phases built from their
    /// own sources `-(+-zeta0) . b / 2`.
    pub max_sum: f64,
    /// `max |Phi(zeta0)|`.
    pub max_phase: f64,
    /// `max |N_{-zeta0} s + N_{zeta0} s|` for the fixed source
    /// `s = -zeta0 . b / 2`.
    pub transform_antisymmetry: f64,
    /// `max |Phi(-zeta0) - Phi(zeta0)|`.
    pub max_difference: f64,
}

pub fn phase_cancellation(op: &LinearizedOperator, zeta0: &[Complex64], params: &CauchyParams) -> Result<PhaseCancellation> {
    let neg: Vec<Complex64> = zeta0.iter().map(|z| -z).collect();
    let (p1, _) = magnetic_phase(op, zeta0, params)?;
    let (p2, _) = magnetic_phase(op, &neg, params)?;
    // N_{-zeta0} of the source built from +zeta0.
    let grid = op.grid();
    let d = grid.dim();
    let source = NodeField::from_raw(
        grid.clone(),
        op.convection()
            .iter()
            .map(|b| -0.5 * (0..d).map(|a| zeta0[a] * b[a]).sum::<Complex64>())
            .collect(),
    );
    let flipped = match support_box(&source) {
        None => ComplexField::zeros(grid.clone()),
        Some(support) => {
            let f = |x: &[f64]| interpolate(&source, x).unwrap_or(Complex64::new(0.0, 0.0));
            cauchy_on_grid(&PlaneSource { support, f: &f }, &neg, grid, params)?.0
        }
    };
    let max_over = |f: &dyn Fn(usize) -> f64| (0..grid.len()).map(f).fold(0.0, f64::max);
    Ok(PhaseCancellation {
        max_sum: max_over(&|n| (p1.get(n) + p2.get(n)).norm()),
        max_phase: max_over(&|n| p1.get(n).norm()),
        transform_antisymmetry: max_over(&|n| (p1.get(n) + flipped.get(n)).norm()),
        max_difference: max_over(&|n| (p1.get(n) - p2.get(n)).norm()),
    })
}
