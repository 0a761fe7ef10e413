use serde::{Deserialize, Serialize};

use super::profile::{falling, GradientSupport, MultiIndex, Profile, MAX_BASE_DIM};
use crate::error::{domain, Error};
use crate::Result;

/// Largest supported ambient dimension `n`.
pub const MAX_DIM: usize = MAX_BASE_DIM + 1;

/// One term `x_n^power * profile(x')` of a conformal factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalTerm {
    pub power: u32,
    pub profile: Profile,
}

/// Conformal factor `c(x', x_n) = sum_k x_n^{p_k} a_k(x')` on `R^n`.
///
/// The metric is `g = c e`. Every derivative is evaluated exactly from the
/// profile expansions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalFactor {
    ambient_dim: usize,
    terms: Vec<NormalTerm>,
    label: String,
}

/// Value, gradient and Hessian of `c` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorJet {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

/// Result of checking positivity and bounded derivatives on sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub min_value: f64,
    pub max_value: f64,
    /// Largest absolute derivative of order `1..=max_checked_order` found.
    pub max_derivative: f64,
    pub max_checked_order: u32,
    /// Largest of `|d_n c(x',0)|` and `|d_n^2 c(x',0)|` over the base points.
    pub max_low_normal: f64,
    pub admissible: bool,
}

impl ConformalFactor {
    pub fn new(ambient_dim: usize, terms: Vec<NormalTerm>, label: impl Into<String>) -> Result<Self> {
        if !(3..=MAX_DIM).contains(&ambient_dim) {
            return domain(format!("ambient dimension must be in 3..={MAX_DIM}, got {ambient_dim}"));
        }
        if terms.is_empty() {
            return domain("conformal factor needs at least one term");
        }
        Ok(ConformalFactor {
            ambient_dim,
            terms,
            label: label.into(),
        })
    }

    /// Constant factor, the Euclidean metric when `level = 1`.
    pub fn constant(ambient_dim: usize, level: f64) -> Result<Self> {
        Self::new(
            ambient_dim,
            vec![NormalTerm {
                power: 0,
                profile: Profile::constant(level),
            }],
            "flat",
        )
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.ambient_dim
    }

    /// Base dimension `d = n - 1`.
    pub fn base_dim(&self) -> usize {
        self.ambient_dim - 1
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn terms(&self) -> &[NormalTerm] {
        &self.terms
    }

    /// Highest derivative order for which exact derivatives are continuous.
    pub fn max_order(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.profile.smoothness())
            .min()
            .unwrap_or(u32::MAX)
            .min(16)
    }

    /// Highest power of `x_n` appearing in the expansion.
    pub fn normal_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.power).max().unwrap_or(0)
    }

    /// `c(x', -x_n) = c(x', x_n)`: every normal power is even.
    pub fn is_even_in_normal(&self) -> bool {
        self.terms.iter().all(|t| t.power % 2 == 0)
    }

    /// Adds a term `x_n^power * profile`. Used to build perturbed factors.
    pub fn with_term(mut self, power: u32, profile: Profile, label: impl Into<String>) -> Self {
        self.terms.push(NormalTerm { power, profile });
        self.label = label.into();
        self
    }

    fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], f64) {
        let d = self.base_dim();
        (&x[..d], x[d])
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (xp, xn) = self.split(x);
        self.terms
            .iter()
            .map(|t| xn.powi(t.power as i32) * t.profile.value(xp))
            .sum()
    }

    /// Value and gradient, cheaper than [`Self::jet`].
    pub fn value_grad(&self, x: &[f64]) -> (f64, [f64; MAX_DIM]) {
        let d = self.base_dim();
        let (xp, xn) = self.split(x);
        let mut value = 0.0;
        let mut grad = [0.0; MAX_DIM];
        for t in &self.terms {
            let p = t.power;
            let r0 = xn.powi(p as i32);
            let r1 = if p >= 1 { p as f64 * xn.powi(p as i32 - 1) } else { 0.0 };
            let a0 = t.profile.value(xp);
            value += r0 * a0;
            grad[d] += r1 * a0;
            if r0 != 0.0 {
                for i in 0..d {
                    let mut ei = [0u32; MAX_BASE_DIM];
                    ei[i] = 1;
                    grad[i] += r0 * t.profile.derivative(xp, &ei);
                }
            }
        }
        (value, grad)
    }

    /// Value with a positivity check.
    pub fn checked_value(&self, x: &[f64]) -> Result<f64> {
        let v = self.value(x);
        if !(v > 0.0) || !v.is_finite() {
            return domain(format!("conformal factor is not positive at {x:?}: c = {v}"));
        }
        Ok(v)
    }

    /// Exact derivative `d^alpha c` where `alpha` has one entry per ambient
    /// coordinate, the last one being the normal direction.
    pub fn derivative(&self, x: &[f64], alpha: &[u32]) -> f64 {
        let d = self.base_dim();
        let (xp, xn) = self.split(x);
        let mut a: MultiIndex = [0; MAX_BASE_DIM];
        a[..d].copy_from_slice(&alpha[..d]);
        let an = alpha[d];
        let mut total = 0.0;
        for t in &self.terms {
            if an > t.power {
                continue;
            }
            let radial = falling(t.power, an) * xn.powi((t.power - an) as i32);
            if radial != 0.0 {
                total += radial * t.profile.derivative(xp, &a);
            }
        }
        total
    }

    /// Checked derivative: refuses orders beyond [`Self::max_order`].
    pub fn try_derivative(&self, x: &[f64], alpha: &[u32]) -> Result<f64> {
        if alpha.len() != self.ambient_dim {
            return domain(format!(
                "multi-index has {} entries, expected {}",
                alpha.len(),
                self.ambient_dim
            ));
        }
        let order: u32 = alpha.iter().sum();
        if order > self.max_order() {
            return Err(Error::Domain(format!(
                "derivative order {order} exceeds the supported order {}",
                self.max_order()
            )));
        }
        Ok(self.derivative(x, alpha))
    }

    /// Partial derivative along the listed coordinate indices, for example
    /// `&[0, 2, 2]` is `d_0 d_2 d_2 c`.
    pub fn partial(&self, x: &[f64], indices: &[usize]) -> f64 {
        let mut alpha = [0u32; MAX_DIM];
        for &i in indices {
            alpha[i] += 1;
        }
        self.derivative(x, &alpha[..self.ambient_dim])
    }

    /// Value, gradient and Hessian in one pass.
    pub fn jet(&self, x: &[f64]) -> FactorJet {
        let n = self.ambient_dim;
        let d = n - 1;
        let (xp, xn) = self.split(x);
        let mut jet = FactorJet {
            value: 0.0,
            grad: [0.0; MAX_DIM],
            hess: [[0.0; MAX_DIM]; MAX_DIM],
        };
        for t in &self.terms {
            let p = t.power;
            let r0 = xn.powi(p as i32);
            let r1 = if p >= 1 { p as f64 * xn.powi(p as i32 - 1) } else { 0.0 };
            let r2 = if p >= 2 {
                (p * (p - 1)) as f64 * xn.powi(p as i32 - 2)
            } else {
                0.0
            };
            let a0 = t.profile.value(xp);
            jet.value += r0 * a0;
            jet.grad[d] += r1 * a0;
            jet.hess[d][d] += r2 * a0;
            for i in 0..d {
                let mut ei = [0u32; MAX_BASE_DIM];
                ei[i] = 1;
                let ai = t.profile.derivative(xp, &ei);
                jet.grad[i] += r0 * ai;
                jet.hess[i][d] += r1 * ai;
                for j in i..d {
                    let mut eij = ei;
                    eij[j] += 1;
                    let aij = t.profile.derivative(xp, &eij);
                    jet.hess[i][j] += r0 * aij;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                jet.hess[i][j] = jet.hess[j][i];
            }
        }
        jet
    }

    /// `d_n^k c(x', 0)` together with its `x'` gradient, for `k = 0..=order`.
    pub fn normal_taylor(&self, xp: &[f64], order: u32) -> Vec<(f64, [f64; MAX_BASE_DIM])> {
        let d = self.base_dim();
        let mut out = vec![(0.0, [0.0; MAX_BASE_DIM]); order as usize + 1];
        for t in &self.terms {
            if t.power > order {
                continue;
            }
            let k = t.power as usize;
            let fact = falling(t.power, t.power);
            out[k].0 += fact * t.profile.value(xp);
            for i in 0..d {
                let mut ei = [0u32; MAX_BASE_DIM];
                ei[i] = 1;
                out[k].1[i] += fact * t.profile.derivative(xp, &ei);
            }
        }
        out
    }

    /// `lambda = log(c) / 2`, so that `g = e^{2 lambda} e`.
    pub fn lambda(&self, x: &[f64]) -> Result<f64> {
        Ok(0.5 * self.checked_value(x)?.ln())
    }

    /// Gradient of `lambda`.
    pub fn grad_lambda(&self, x: &[f64]) -> Result<[f64; MAX_DIM]> {
        let j = self.jet(x);
        if !(j.value > 0.0) {
            return domain(format!("conformal factor is not positive at {x:?}"));
        }
        let mut g = [0.0; MAX_DIM];
        for i in 0..self.ambient_dim {
            g[i] = 0.5 * j.grad[i] / j.value;
        }
        Ok(g)
    }

    /// Checks positivity and bounded derivatives up to `order` on `points`.
    pub fn admissibility<'a>(
        &self,
        points: impl IntoIterator<Item = &'a [f64]>,
        order: u32,
        derivative_bound: f64,
    ) -> Admissibility {
        let order = order.min(self.max_order());
        let n = self.ambient_dim;
        let mut alphas: Vec<Vec<u32>> = Vec::new();
        let mut current = vec![0u32; n];
        collect_indices(0, order, &mut current, &mut alphas);
        alphas.retain(|a| a.iter().sum::<u32>() >= 1);
        let mut report = Admissibility {
            min_value: f64::INFINITY,
            max_value: f64::NEG_INFINITY,
            max_derivative: 0.0,
            max_checked_order: order,
            max_low_normal: 0.0,
            admissible: true,
        };
        let d = self.base_dim();
        for x in points {
            let taylor = self.normal_taylor(&x[..d], 2);
            report.max_low_normal = report.max_low_normal.max(taylor[1].0.abs()).max(taylor[2].0.abs());
            let v = self.value(x);
            report.min_value = report.min_value.min(v);
            report.max_value = report.max_value.max(v);
            for a in &alphas {
                let dv = self.derivative(x, a).abs();
                if !dv.is_finite() {
                    report.max_derivative = f64::INFINITY;
                } else {
                    report.max_derivative = report.max_derivative.max(dv);
                }
            }
        }
        report.admissible = report.min_value > 0.0
            && report.min_value.is_finite()
            && report.max_value.is_finite()
            && report.max_derivative <= derivative_bound
            && report.max_low_normal <= 1e-14;
        report
    }

    /// Region where `grad' c(., 0)` can be non-zero.
    pub fn base_gradient_support(&self) -> GradientSupport {
        let parts = self
            .terms
            .iter()
            .filter(|t| t.power == 0)
            .map(|t| t.profile.gradient_support());
        let mut balls = Vec::new();
        for p in parts {
            match p {
                GradientSupport::Empty => {}
                GradientSupport::Unbounded => return GradientSupport::Unbounded,
                b => balls.push(b),
            }
        }
        match balls.len() {
            0 => GradientSupport::Empty,
            1 => balls.pop().unwrap(),
            _ => GradientSupport::Unbounded,
        }
    }
}

fn collect_indices(slot: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slot == current.len() {
        out.push(current.clone());
        return;
    }
    for k in 0..=left {
        current[slot] = k;
        collect_indices(slot + 1, left - k, current, out);
    }
    current[slot] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::profile::Bump;
    use approx::assert_relative_eq;

    fn sample() -> ConformalFactor {
        let bump = Profile::Bump(Bump::new(&[0.1, -0.1], 0.9, 8, 1.0).unwrap());
        let bg = Profile::Sum {
            terms: vec![Profile::constant(1.0), Profile::exponential(0.2, &[0.3, -0.4])],
        };
        ConformalFactor::new(
            3,
            vec![
                NormalTerm { power: 0, profile: bg.clone() },
                NormalTerm {
                    power: 3,
                    profile: Profile::Product { factors: vec![bg, bump] },
                },
            ],
            "sample",
        )
        .unwrap()
    }

    #[test]
    fn jet_agrees_with_derivative() {
        let c = sample();
        let x = [0.2, -0.3, 0.15];
        let j = c.jet(&x);
        assert_relative_eq!(j.value, c.value(&x), max_relative = 1e-14);
        for i in 0..3 {
            assert_relative_eq!(j.grad[i], c.partial(&x, &[i]), max_relative = 1e-13);
            for k in 0..3 {
                assert_relative_eq!(j.hess[i][k], c.partial(&x, &[i, k]), max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn value_grad_agrees_with_jet() {
        let c = sample();
        for x in [[0.2, -0.3, 0.15], [0.0, 0.1, 0.0], [0.5, 0.5, -0.4]] {
            let j = c.jet(&x);
            let (v, g) = c.value_grad(&x);
            assert_relative_eq!(v, j.value, max_relative = 1e-15);
            for i in 0..3 {
                assert_relative_eq!(g[i], j.grad[i], max_relative = 1e-13, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn normal_taylor_matches_derivatives() {
        let c = sample();
        let xp = [0.2, -0.3];
        let t = c.normal_taylor(&xp, 4);
        for k in 0..=4u32 {
            let x = [xp[0], xp[1], 0.0];
            assert_relative_eq!(t[k as usize].0, c.derivative(&x, &[0, 0, k]), epsilon = 1e-13);
            assert_relative_eq!(t[k as usize].1[1], c.derivative(&x, &[0, 1, k]), epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_order_is_limited() {
        let c = sample();
        assert_eq!(c.max_order(), 7);
        assert!(c.try_derivative(&[0.0, 0.0, 0.0], &[4, 4, 0]).is_err());
        assert!(c.try_derivative(&[0.0, 0.0, 0.0], &[2, 2, 2]).is_ok());
    }

    #[test]
    fn non_positive_factor_is_rejected() {
        let c = ConformalFactor::constant(3, -1.0).unwrap();
        assert!(c.checked_value(&[0.0, 0.0, 0.0]).is_err());
        assert!(c.lambda(&[0.0, 0.0, 0.0]).is_err());
        let pts = [vec![0.0, 0.0, 0.0]];
        assert!(!c.admissibility(pts.iter().map(|p| p.as_slice()), 2, 1e6).admissible);
    }
}
