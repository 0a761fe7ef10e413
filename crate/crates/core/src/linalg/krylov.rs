use super::csr::CsrMatrix;
use crate::error::Error;
use crate::Result;

/// Approximate inverse applied as `z = M^{-1} r`.
pub trait Preconditioner: Sync + Send {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Incomplete LU with zero fill on the sparsity pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let row_ptr = a.row_ptr().to_vec();
        let cols = a.cols().to_vec();
        let mut vals = a.vals().to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if cols[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::Singular(format!("row {i} has no diagonal entry")));
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (row_ptr[i], row_ptr[i + 1]);
            for k in start..end {
                pos[cols[k]] = k;
            }
            for kk in start..end {
                let k = cols[kk];
                if k >= i {
                    break;
                }
                let pivot = vals[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::Singular(format!("zero ILU pivot at row {k}")));
                }
                let l = vals[kk] / pivot;
                vals[kk] = l;
                for m in (diag[k] + 1)..row_ptr[k + 1] {
                    let p = pos[cols[m]];
                    if p != usize::MAX {
                        vals[p] -= l * vals[m];
                    }
                }
            }
            for k in start..end {
                pos[cols[k]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 {
                return Err(Error::Singular(format!("zero ILU pivot at row {i}")));
            }
        }
        Ok(Ilu0 { row_ptr, cols, vals, diag })
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut acc = r[i];
            for k in self.row_ptr[i]..self.diag[i] {
                acc -= self.vals[k] * z[self.cols[k]];
            }
            z[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for k in (self.diag[i] + 1)..self.row_ptr[i + 1] {
                acc -= self.vals[k] * z[self.cols[k]];
            }
            z[i] = acc / self.vals[self.diag[i]];
        }
    }
}

impl Preconditioner for super::band::BandLu {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve_in_place(z);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Right-preconditioned BiCGSTAB. `x` holds the initial guess on entry.
/// Stops when `||b - A x|| <= tol ||b||` or after `max_iter` iterations, and
/// returns the true relative residual either way.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    m: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> KrylovStats {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return KrylovStats {
            iterations: 0,
            relative_residual: 0.0,
        };
    }
    let mut r = vec![0.0; n];
    let true_residual = |x: &[f64], r: &mut Vec<f64>| {
        a.mul_vec_into(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        norm(r) / bnorm
    };
    let mut rel = true_residual(x, &mut r);
    let mut total = 0;
    // Restart from the true residual when the recurrence drifts or breaks down.
    while rel > tol && total < max_iter {
        let r_hat = r.clone();
        let mut p = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut p_hat = vec![0.0; n];
        let mut s_hat = vec![0.0; n];
        let mut t = vec![0.0; n];
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut breakdown = false;
        while total < max_iter {
            total += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new == 0.0 || omega == 0.0 {
                breakdown = true;
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            m.apply(&p, &mut p_hat);
            a.mul_vec_into(&p_hat, &mut v);
            let den = dot(&r_hat, &v);
            if den == 0.0 {
                breakdown = true;
                break;
            }
            alpha = rho / den;
            for i in 0..n {
                r[i] -= alpha * v[i];
                x[i] += alpha * p_hat[i];
            }
            if norm(&r) / bnorm <= 0.1 * tol {
                break;
            }
            m.apply(&r, &mut s_hat);
            a.mul_vec_into(&s_hat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                breakdown = true;
                break;
            }
            omega = dot(&t, &r) / tt;
            for i in 0..n {
                x[i] += omega * s_hat[i];
                r[i] -= omega * t[i];
            }
            if norm(&r) / bnorm <= 0.1 * tol {
                break;
            }
        }
        let new_rel = true_residual(x, &mut r);
        let stagnated = new_rel >= rel * 0.5 && !breakdown;
        rel = new_rel;
        if stagnated {
            break;
        }
    }
    KrylovStats {
        iterations: total,
        relative_residual: rel,
    }
}
