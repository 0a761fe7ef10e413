//! Pointwise forms of the minimal surface operator for graphs `x_n = u(x')`.

use super::factor::{ConformalFactor, MAX_DIM};
use super::profile::MAX_BASE_DIM;
use crate::error::domain;
use crate::Result;

/// Second-order jet `(x', u, p, P)` of a graph at one base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetPoint {
    /// Base dimension `d = n - 1`.
    pub dim: usize,
    pub x_prime: [f64; MAX_BASE_DIM],
    pub u: f64,
    pub p: [f64; MAX_BASE_DIM],
    pub hess: [[f64; MAX_BASE_DIM]; MAX_BASE_DIM],
}

impl JetPoint {
    /// Builds a jet, checking dimensions and the symmetry of `P`.
    pub fn new(x_prime: &[f64], u: f64, p: &[f64], hess: &[&[f64]]) -> Result<Self> {
        let dim = x_prime.len();
        if dim == 0 || dim > MAX_BASE_DIM || p.len() != dim || hess.len() != dim {
            return domain("jet components have inconsistent dimensions");
        }
        let mut jet = JetPoint {
            dim,
            x_prime: [0.0; MAX_BASE_DIM],
            u,
            p: [0.0; MAX_BASE_DIM],
            hess: [[0.0; MAX_BASE_DIM]; MAX_BASE_DIM],
        };
        jet.x_prime[..dim].copy_from_slice(x_prime);
        jet.p[..dim].copy_from_slice(p);
        for i in 0..dim {
            if hess[i].len() != dim {
                return domain("Hessian is not square");
            }
            for j in 0..dim {
                let (a, b) = (hess[i][j], hess[j][i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return domain(format!("Hessian is not symmetric: P[{i}][{j}] = {a}, P[{j}][{i}] = {b}"));
                }
                jet.hess[i][j] = a;
            }
        }
        Ok(jet)
    }

    /// The point `(x', u)` in `R^n`.
    pub fn ambient_point(&self) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        x[..self.dim].copy_from_slice(&self.x_prime[..self.dim]);
        x[self.dim] = self.u;
        x
    }

    /// `1 + |p|^2`.
    pub fn w(&self) -> f64 {
        1.0 + self.p[..self.dim].iter().map(|v| v * v).sum::<f64>()
    }

    /// `p^T P p`.
    pub fn ppp(&self) -> f64 {
        let mut q = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                q += self.hess[i][j] * self.p[i] * self.p[j];
            }
        }
        q
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.hess[i][i]).sum()
    }

    /// Exact `sum_j d_j (p_j / sqrt(1 + |p|^2))` implied by the jet.
    pub fn flux_divergence(&self) -> f64 {
        let w = self.w();
        self.trace() / w.sqrt() - self.ppp() / w.powf(1.5)
    }
}

/// Christoffel symbols `gamma[m][i][j]` of `g = c e` at a point of `R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel {
    pub dim: usize,
    pub gamma: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
}

impl Christoffel {
    pub fn get(&self, m: usize, i: usize, j: usize) -> f64 {
        self.gamma[m][i][j]
    }
}

/// `Gamma^m_ij = d_i lambda delta_jm + d_j lambda delta_im - d_m lambda delta_ij`
/// with `lambda = log(c) / 2`.
pub fn christoffel(c: &ConformalFactor, x: &[f64]) -> Result<Christoffel> {
    let dl = c.grad_lambda(x)?;
    Ok(christoffel_from_log_gradient(&dl[..c.dim()]))
}

/// Christoffel symbols of `e^{2 lambda} e` from `grad lambda`.
pub fn christoffel_from_log_gradient(dl: &[f64]) -> Christoffel {
    let n = dl.len();
    let mut gamma = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                if j == m {
                    v += dl[i];
                }
                if i == m {
                    v += dl[j];
                }
                if i == j {
                    v -= dl[m];
                }
                gamma[m][i][j] = v;
            }
        }
    }
    Christoffel { dim: n, gamma }
}

fn check_jet(c: &ConformalFactor, jet: &JetPoint) -> Result<()> {
    if jet.dim != c.base_dim() {
        return domain(format!(
            "jet has base dimension {}, factor expects {}",
            jet.dim,
            c.base_dim()
        ));
    }
    Ok(())
}

fn positive(value: f64, jet: &JetPoint) -> Result<f64> {
    if !(value > 0.0) || !value.is_finite() {
        return domain(format!(
            "conformal factor is not positive at {:?}: c = {value}",
            jet.ambient_point()
        ));
    }
    Ok(value)
}

/// The graph form `F(x', u, p, P)`.
pub fn eval_f(c: &ConformalFactor, jet: &JetPoint) -> Result<f64> {
    check_jet(c, jet)?;
    let d = jet.dim;
    let n = c.dim();
    let (cv, g) = c.value_grad(&jet.ambient_point());
    let cv = positive(cv, jet)?;
    let pc: f64 = (0..d).map(|i| jet.p[i] * g[i]).sum();
    Ok(-jet.trace() - (n as f64 - 1.0) / (2.0 * cv) * (pc - g[d]) + jet.ppp() / jet.w())
}

/// `F` together with its partial derivatives in `u`, `p` and `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FPartials {
    pub value: f64,
    pub du: f64,
    pub dp: [f64; MAX_BASE_DIM],
    /// Derivative in `P_kl` treating `P_kl` and `P_lk` as independent.
    pub dhess: [[f64; MAX_BASE_DIM]; MAX_BASE_DIM],
}

/// Evaluates `F` and its first derivatives, as used for the Newton Jacobian.
pub fn f_partials(c: &ConformalFactor, jet: &JetPoint) -> Result<FPartials> {
    check_jet(c, jet)?;
    let d = jet.dim;
    let k = c.dim() as f64 - 1.0;
    let cj = c.jet(&jet.ambient_point());
    let cv = positive(cj.value, jet)?;
    let w = jet.w();
    let q = jet.ppp();
    let pc: f64 = (0..d).map(|i| jet.p[i] * cj.grad[i]).sum();
    let value = -jet.trace() - k / (2.0 * cv) * (pc - cj.grad[d]) + q / w;
    let pc_n: f64 = (0..d).map(|i| jet.p[i] * cj.hess[i][d]).sum();
    let du = k / (2.0 * cv * cv) * cj.grad[d] * (pc - cj.grad[d]) - k / (2.0 * cv) * (pc_n - cj.hess[d][d]);
    let mut dp = [0.0; MAX_BASE_DIM];
    let mut dhess = [[0.0; MAX_BASE_DIM]; MAX_BASE_DIM];
    for a in 0..d {
        let pp: f64 = (0..d).map(|b| jet.hess[a][b] * jet.p[b]).sum();
        dp[a] = -k / (2.0 * cv) * cj.grad[a] - 2.0 * jet.p[a] * q / (w * w) + 2.0 * pp / w;
        for b in 0..d {
            dhess[a][b] = jet.p[a] * jet.p[b] / w - if a == b { 1.0 } else { 0.0 };
        }
    }
    Ok(FPartials { value, du, dp, dhess })
}

/// `c^2 (|grad_g f|^2 Lap_g f - Hess_g f(grad_g f, grad_g f))` for the level
/// set function `f = x_n - u(x')`, assembled from the Riemannian gradient and
/// Hessian.
pub fn implicit_form(c: &ConformalFactor, jet: &JetPoint) -> Result<f64> {
    check_jet(c, jet)?;
    let n = c.dim();
    let d = jet.dim;
    let x = jet.ambient_point();
    let cv = positive(c.value(&x), jet)?;
    let gamma = christoffel(c, &x)?;
    // Euclidean partials of f.
    let mut df = [0.0; MAX_DIM];
    for i in 0..d {
        df[i] = -jet.p[i];
    }
    df[d] = 1.0;
    let mut ddf = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..d {
        for j in 0..d {
            ddf[i][j] = -jet.hess[i][j];
        }
    }
    // Covariant Hessian.
    let mut hess = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            let mut v = ddf[i][j];
            for m in 0..n {
                v -= gamma.get(m, i, j) * df[m];
            }
            hess[i][j] = v;
        }
    }
    // grad_g f = g^{-1} df, |grad_g f|^2 = |df|^2 / c.
    let grad: Vec<f64> = df[..n].iter().map(|v| v / cv).collect();
    let norm2: f64 = df[..n].iter().map(|v| v * v).sum::<f64>() / cv;
    let lap: f64 = (0..n).map(|i| hess[i][i]).sum::<f64>() / cv;
    let mut hgg = 0.0;
    for i in 0..n {
        for j in 0..n {
            hgg += hess[i][j] * grad[i] * grad[j];
        }
    }
    Ok(cv * cv * (norm2 * lap - hgg))
}

/// Divergence form `-div_g(grad u / sqrt(W)) + (n-1) d_n c / (2 c sqrt(W))`,
/// where `div_g X = d_j X^j + sum_{i<n} Gamma^i_ij X^j`. The Euclidean part
/// `d_j(p_j / sqrt(W))` is supplied by the caller so that a discrete flux
/// divergence can be used.
pub fn divergence_form(c: &ConformalFactor, jet: &JetPoint, flux_divergence: f64) -> Result<f64> {
    check_jet(c, jet)?;
    let d = jet.dim;
    let x = jet.ambient_point();
    let cv = positive(c.value(&x), jet)?;
    let gamma = christoffel(c, &x)?;
    let sw = jet.w().sqrt();
    let mut contracted = 0.0;
    for j in 0..d {
        let trace_j: f64 = (0..d).map(|i| gamma.get(i, i, j)).sum();
        contracted += trace_j * jet.p[j] / sw;
    }
    let dn = c.partial(&x, &[d]);
    Ok(-(flux_divergence + contracted) + (c.dim() as f64 - 1.0) * dn / (2.0 * cv * sw))
}

/// Classical Euclidean operator `-div(grad u / sqrt(W)) * sqrt(W)`.
pub fn euclidean_form(jet: &JetPoint, flux_divergence: f64) -> f64 {
    -flux_divergence * jet.w().sqrt()
}

/// Factor relating the forms: `graph = sqrt(1 + |p|^2) * divergence`.
pub fn divergence_to_graph_factor(jet: &JetPoint) -> f64 {
    jet.w().sqrt()
}
