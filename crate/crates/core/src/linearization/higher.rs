//! Order-`m` boundary/interior identity. The mixed derivative `u_m` of the
//! solution map satisfies `L u_m = R_m`, where `R_m` is the order-`m`
//! coefficient of `F` on the lower-order expansion. Its top part is
//! `(n-1)/(2c) d_n^(m+1) c prod v_i`; everything else is evaluated from the
//! interior divided differences of the proper sub-stencils.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adjoint::adjoint_solution;
use super::divided::{divided_difference, DividedDifference};
use super::hyperdual::{eval_f_multilinear, MultilinearJet, MAX_ORDER};
use crate::error::config;
use crate::forward::ForwardSolver;
use crate::geometry::MAX_BASE_DIM;
use crate::grid::{
    gradient_fd, hessian_fd, integrate_boundary, integrate_interior, BoundaryField, NodeField, ScalarField,
};
use crate::Result;

/// Safety factor on the `h^2 + eps^2` part of the error budget.
pub const BUDGET_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderReport {
    pub order: usize,
    pub eps: f64,
    pub h: f64,
    /// `int_dOmega v0 d_nu (dd_m u)`, observable from DN data.
    pub boundary_integral: f64,
    /// `int_Omega v0 R_m` with the exact top coefficient included.
    pub interior_integral: f64,
    /// `int_Omega v0 (R_m - top term)`.
    pub remainder_integral: f64,
    /// `boundary_integral - remainder_integral`.
    pub recovered_top: f64,
    /// `int_Omega v0 (n-1)/(2c) d_n^(m+1) c prod v_i` with exact first
    /// linearizations `v_i`.
    pub exact_top: f64,
    /// `recovered_top / exact_top`, the empirical constant in front of the
    /// top coefficient.
    pub top_constant: Option<f64>,
    /// `|boundary - interior| / max(|boundary|, |interior|)`.
    pub identity_residual: f64,
    /// `eps^-m * residual_tolerance * |Omega| * sup v0`.
    pub noise_floor: f64,
    /// `BUDGET_FACTOR * (h^2 + eps^2) * (int |top| + int |rest of R_m|) + noise_floor`;
    /// the quadrature and stencil errors of both parts of the source enter
    /// the recovered top term.
    pub budget: f64,
    pub solves: usize,
}

impl HigherOrderReport {
    pub fn within_budget(&self) -> bool {
        (self.recovered_top - self.exact_top).abs() <= self.budget
    }
}

fn subset(directions: &[BoundaryField], mask: usize) -> Vec<BoundaryField> {
    directions
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, f)| f.clone())
        .collect()
}

/// Runs the order-`m` identity with `m = directions.len()` at amplitude `eps`.
pub fn verify_higher_order(
    solver: &ForwardSolver,
    directions: &[BoundaryField],
    eps: f64,
) -> Result<HigherOrderReport> {
    let m = directions.len();
    if !(2..=MAX_ORDER).contains(&m) {
        return config(format!("identity order must lie in 2..={MAX_ORDER}, got {m}"));
    }
    let op = solver.operator();
    let grid = op.grid().clone();
    let c = op.factor().clone();
    let n = c.dim();
    let d = grid.dim();
    let full = (1usize << m) - 1;

    // Every non-empty sub-stencil, in mask order.
    let dds: Vec<DividedDifference> = (1..=full)
        .map(|mask| divided_difference(solver, &subset(directions, mask), eps))
        .collect::<Result<_>>()?;
    let solves = dds.iter().map(|dd| dd.solves).sum();
    let grads: Vec<_> = dds.iter().map(|dd| gradient_fd(&dd.u)).collect();
    let hessians: Vec<_> = dds.iter().map(|dd| hessian_fd(&dd.u)).collect();

    let k = (n as f64 - 1.0) / 2.0;
    let remainders: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let x = grid.coord(node);
            let mut taylor = c.normal_taylor(&x[..d], m as u32 + 1);
            let mut jet = MultilinearJet::zero(m);
            for mask in 1..full {
                let i = mask - 1;
                jet.u.set(mask, dds[i].u.get(node));
                for a in 0..d {
                    jet.p[a].set(mask, grads[i][node][a]);
                    for b in 0..d {
                        jet.hess[a][b].set(mask, hessians[i][node][a][b]);
                    }
                }
            }
            let with_top = eval_f_multilinear(n, &taylor, &jet)?.top();
            taylor[m + 1] = (0.0, [0.0; MAX_BASE_DIM]);
            let without = eval_f_multilinear(n, &taylor, &jet)?.top();
            Ok((with_top, without))
        })
        .collect::<Result<_>>()?;

    let v0 = adjoint_solution(op);
    let weighted = |f: &dyn Fn(usize) -> f64| {
        let vals = (0..grid.len()).map(|node| v0.get(node) * f(node)).collect();
        integrate_interior(&NodeField::from_raw(grid.clone(), vals))
    };
    let interior_integral = weighted(&|node| remainders[node].0);
    let remainder_integral = weighted(&|node| remainders[node].1);
    let flux = dds[full - 1].dn.zip_with(&v0.trace(), |a, b| a * b);
    let boundary_integral = integrate_boundary(&flux);

    // Independent top term from the exact first linearizations.
    let firsts: Vec<ScalarField> = directions.iter().map(|f| op.solve_first(f)).collect::<Result<_>>()?;
    let top_integrand = |node: usize| {
        let x = grid.coord(node);
        let t = c.normal_taylor(&x[..d], m as u32 + 1);
        k / op.gamma()[node] * t[m + 1].0 * firsts.iter().map(|v| v.get(node)).product::<f64>()
    };
    let exact_top = weighted(&top_integrand);
    let top_abs = weighted(&|node| top_integrand(node).abs());
    let rest_abs = weighted(&|node| remainders[node].1.abs());

    let recovered_top = boundary_integral - remainder_integral;
    let scale = boundary_integral.abs().max(interior_integral.abs());
    let identity_residual = if scale == 0.0 {
        0.0
    } else {
        (boundary_integral - interior_integral).abs() / scale
    };
    let measure: f64 = integrate_interior(&ScalarField::from_fn(grid.clone(), |_| 1.0));
    let noise_floor = solver.config().residual_tolerance / eps.powi(m as i32) * measure * v0.sup_norm();
    let h = grid.h();
    let budget = BUDGET_FACTOR * (h * h + eps * eps) * (top_abs + rest_abs) + noise_floor;
    Ok(HigherOrderReport {
        order: m,
        eps,
        h,
        boundary_integral,
        interior_integral,
        remainder_integral,
        recovered_top,
        exact_top,
        top_constant: (exact_top != 0.0).then(|| recovered_top / exact_top),
        identity_residual,
        noise_floor,
        budget,
        solves,
    })
}
