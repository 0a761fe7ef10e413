//! Sparse linear algebra: CSR storage, banded LU, ILU(0) and BiCGSTAB.

pub mod band;
pub mod csr;
pub mod krylov;

pub use band::BandLu;
pub use csr::{CsrBuilder, CsrMatrix};
pub use krylov::{bicgstab, Ilu0, KrylovStats, Preconditioner};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Relative residual every linear solve aims for.
pub const TARGET_RESIDUAL: f64 = 1e-12;

/// Relative residual still accepted when iterative refinement stagnates at
/// the roundoff floor of a fine grid.
pub const ACCEPT_RESIDUAL: f64 = 1e-9;

const DIRECT_MAX_BYTES: usize = 320 << 20;
const DIRECT_MAX_FLOPS: f64 = 2e10;
const KRYLOV_MAX_ITER: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Banded LU when it fits the memory and time budget, ILU(0)-BiCGSTAB otherwise.
    #[default]
    Auto,
    Direct,
    Krylov,
}

/// Diagnostics of one linear solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub relative_residual: f64,
    pub iterations: usize,
    pub direct: bool,
}

#[derive(Debug, Clone)]
enum Factor {
    Direct(BandLu),
    Krylov(Ilu0),
}

/// A matrix together with a reusable factorization.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    matrix: CsrMatrix,
    factor: Factor,
}

impl LinearSolver {
    pub fn new(matrix: CsrMatrix, kind: SolverKind) -> Result<Self> {
        let direct = match kind {
            SolverKind::Direct => true,
            SolverKind::Krylov => false,
            SolverKind::Auto => {
                BandLu::storage_bytes(&matrix) <= DIRECT_MAX_BYTES
                    && BandLu::factor_flops(&matrix) <= DIRECT_MAX_FLOPS
            }
        };
        let factor = if direct {
            Factor::Direct(BandLu::factor(&matrix)?)
        } else {
            Factor::Krylov(Ilu0::new(&matrix)?)
        };
        Ok(LinearSolver { matrix, factor })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.factor, Factor::Direct(_))
    }

    /// Smallest over largest pivot of the direct factorization.
    pub fn pivot_ratio(&self) -> Option<f64> {
        match &self.factor {
            Factor::Direct(lu) => Some(lu.pivot_ratio()),
            Factor::Krylov(_) => None,
        }
    }

    pub fn preconditioner(&self) -> &dyn Preconditioner {
        match &self.factor {
            Factor::Direct(lu) => lu,
            Factor::Krylov(ilu) => ilu,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        match &self.factor {
            Factor::Direct(lu) => solve_refined(&self.matrix, lu, b),
            Factor::Krylov(ilu) => solve_preconditioned(&self.matrix, b, ilu, None),
        }
    }
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) -> f64 {
    a.mul_vec_into(x, r);
    let mut num = 0.0;
    let mut den = 0.0;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
        num += *ri * *ri;
        den += bi * bi;
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

fn accept(x: Vec<f64>, stats: SolveStats) -> Result<(Vec<f64>, SolveStats)> {
    if stats.relative_residual <= ACCEPT_RESIDUAL {
        if stats.relative_residual > TARGET_RESIDUAL {
            log::debug!(
                "linear solve stagnated at relative residual {:.2e}",
                stats.relative_residual
            );
        }
        Ok((x, stats))
    } else {
        Err(Error::LinearSolve(format!(
            "relative residual {:.3e} after {} iterations",
            stats.relative_residual, stats.iterations
        )))
    }
}

/// Direct solve followed by iterative refinement.
fn solve_refined(a: &CsrMatrix, lu: &BandLu, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x);
    let mut r = vec![0.0; b.len()];
    let mut rel = relative_residual(a, &x, b, &mut r);
    let mut iterations = 1;
    while rel > TARGET_RESIDUAL && iterations < 6 {
        lu.solve_in_place(&mut r);
        let candidate: Vec<f64> = x.iter().zip(&r).map(|(p, q)| p + q).collect();
        let mut r2 = vec![0.0; b.len()];
        let rel2 = relative_residual(a, &candidate, b, &mut r2);
        iterations += 1;
        if rel2 >= rel {
            break;
        }
        x = candidate;
        r = r2;
        rel = rel2;
    }
    accept(
        x,
        SolveStats {
            relative_residual: rel,
            iterations,
            direct: true,
        },
    )
}

/// Preconditioned BiCGSTAB from an optional initial guess.
pub fn solve_preconditioned(
    a: &CsrMatrix,
    b: &[f64],
    pre: &dyn Preconditioner,
    guess: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveStats)> {
    let mut x = match guess {
        Some(g) => g.to_vec(),
        None => vec![0.0; b.len()],
    };
    let stats = bicgstab(a, b, &mut x, pre, TARGET_RESIDUAL, KRYLOV_MAX_ITER);
    accept(
        x,
        SolveStats {
            relative_residual: stats.relative_residual,
            iterations: stats.iterations,
            direct: false,
        },
    )
}
