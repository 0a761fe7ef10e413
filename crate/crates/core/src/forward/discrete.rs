//! Discrete graph residual and its exact Jacobian at interior nodes.

use rayon::prelude::*;

use crate::geometry::{f_partials, eval_f, ConformalFactor, JetPoint, MAX_BASE_DIM};
use crate::grid::Grid;
use crate::linalg::CsrMatrix;
use crate::linearization::operator::{assemble, Row};
use crate::Result;

/// Centred jet of `u` at an interior node.
pub fn interior_jet(grid: &Grid, u: &[f64], node: usize) -> JetPoint {
    let d = grid.dim();
    let x = grid.coord(node);
    let mut jet = JetPoint {
        dim: d,
        x_prime: x,
        u: u[node],
        p: [0.0; MAX_BASE_DIM],
        hess: [[0.0; MAX_BASE_DIM]; MAX_BASE_DIM],
    };
    let c = u[node];
    for a in 0..d {
        let h = grid.spacing()[a];
        let s = grid.stride(a);
        let (up, um) = (u[node + s], u[node - s]);
        jet.p[a] = (up - um) / (2.0 * h);
        jet.hess[a][a] = (up - 2.0 * c + um) / (h * h);
        for b in (a + 1)..d {
            let hb = grid.spacing()[b];
            let t = grid.stride(b);
            let m = (u[node + s + t] - u[node + s - t] - u[node - s + t] + u[node - s - t]) / (4.0 * h * hb);
            jet.hess[a][b] = m;
            jet.hess[b][a] = m;
        }
    }
    jet
}

/// `F` at every interior node, in interior-unknown order.
pub fn residual(c: &ConformalFactor, grid: &Grid, u: &[f64]) -> Result<Vec<f64>> {
    grid.interior()
        .par_iter()
        .map(|&node| eval_f(c, &interior_jet(grid, u, node)))
        .collect()
}

/// Jacobian rows of the discrete residual at every interior node.
fn jacobian_row(c: &ConformalFactor, grid: &Grid, u: &[f64], node: usize) -> Result<Row> {
    let d = grid.dim();
    let fp = f_partials(c, &interior_jet(grid, u, node))?;
    let mut row: Row = Vec::with_capacity(2 * d * d + 1);
    let mut center = fp.du;
    for a in 0..d {
        let h = grid.spacing()[a];
        let s = grid.stride(a);
        let paa = fp.dhess[a][a];
        row.push((node + s, fp.dp[a] / (2.0 * h) + paa / (h * h)));
        row.push((node - s, -fp.dp[a] / (2.0 * h) + paa / (h * h)));
        center -= 2.0 * paa / (h * h);
        for b in (a + 1)..d {
            let hb = grid.spacing()[b];
            let t = grid.stride(b);
            let k = (fp.dhess[a][b] + fp.dhess[b][a]) / (4.0 * h * hb);
            row.push((node + s + t, k));
            row.push((node + s - t, -k));
            row.push((node - s + t, -k));
            row.push((node - s - t, k));
        }
    }
    row.push((node, center));
    Ok(row)
}

/// Exact Jacobian of [`residual`] with respect to the interior unknowns.
pub fn jacobian(c: &ConformalFactor, grid: &Grid, u: &[f64]) -> Result<CsrMatrix> {
    let rows: Vec<Row> = grid
        .interior()
        .par_iter()
        .map(|&node| jacobian_row(c, grid, u, node))
        .collect::<Result<_>>()?;
    let mut it = rows.into_iter();
    Ok(assemble(grid, 1.0, |_| it.next().unwrap()).matrix)
}
