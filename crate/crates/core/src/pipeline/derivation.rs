//! Randomized check that the implicit (level-set) residual equals
//! `(1 + |p|^2)` times the graph residual for analytic graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{eval_f, implicit_form, ConformalFactor, JetPoint, ScenarioSpec, MAX_BASE_DIM};
use crate::Result;

/// Points per random sample set.
pub const POINTS_PER_SET: usize = 16;

/// `u(x) = a0 + a.x + x.B x / 2 + s sin(k.x + phi)` with small random
/// coefficients, so that `(x', u)` stays where the catalog factors are
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticGraph {
    pub a0: f64,
    pub a: [f64; MAX_BASE_DIM],
    pub b: [[f64; MAX_BASE_DIM]; MAX_BASE_DIM],
    pub s: f64,
    pub k: [f64; MAX_BASE_DIM],
    pub phi: f64,
    pub dim: usize,
}

impl AnalyticGraph {
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        let mut g = AnalyticGraph {
            a0: rng.gen_range(-0.1..0.1),
            a: [0.0; MAX_BASE_DIM],
            b: [[0.0; MAX_BASE_DIM]; MAX_BASE_DIM],
            s: rng.gen_range(-0.1..0.1),
            k: [0.0; MAX_BASE_DIM],
            phi: rng.gen_range(0.0..std::f64::consts::TAU),
            dim,
        };
        for i in 0..dim {
            g.a[i] = rng.gen_range(-0.2..0.2);
            g.k[i] = rng.gen_range(-3.0..3.0);
            for j in 0..=i {
                let v = rng.gen_range(-0.2..0.2);
                g.b[i][j] = v;
                g.b[j][i] = v;
            }
        }
        g
    }

    /// Exact second-order jet at `x`.
    pub fn jet(&self, x: &[f64]) -> JetPoint {
        let d = self.dim;
        let dot = |v: &[f64]| (0..d).map(|i| v[i] * x[i]).sum::<f64>();
        let arg = dot(&self.k) + self.phi;
        let (sn, cs) = arg.sin_cos();
        let mut jet = JetPoint {
            dim: d,
            x_prime: [0.0; MAX_BASE_DIM],
            u: self.a0 + dot(&self.a) + self.s * sn,
            p: [0.0; MAX_BASE_DIM],
            hess: [[0.0; MAX_BASE_DIM]; MAX_BASE_DIM],
        };
        for i in 0..d {
            jet.x_prime[i] = x[i];
            let bx: f64 = (0..d).map(|j| self.b[i][j] * x[j]).sum();
            jet.u += 0.5 * x[i] * bx;
            jet.p[i] = self.a[i] + bx + self.s * cs * self.k[i];
            for j in 0..d {
                jet.hess[i][j] = self.b[i][j] - self.s * sn * self.k[i] * self.k[j];
            }
        }
        jet
    }
}

/// `|implicit - W graph| / max(|implicit|, W |graph|)` at one jet.
pub fn relative_defect(c: &ConformalFactor, jet: &JetPoint) -> Result<f64> {
    let im = implicit_form(c, jet)?;
    let scaled = jet.w() * eval_f(c, jet)?;
    let scale = im.abs().max(scaled.abs());
    Ok(if scale == 0.0 { 0.0 } else { (im - scaled).abs() / scale })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationRow {
    pub scenario: String,
    pub dim: usize,
    pub sets: usize,
    pub points: usize,
    pub max_relative: f64,
}

/// Runs `sets` random sample sets on each scenario, points drawn in
/// `[-half_width, half_width]^(n-1)`.
pub fn derivation_check(specs: &[ScenarioSpec], sets: usize, half_width: f64, seed: u64) -> Result<Vec<DerivationRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    specs
        .iter()
        .map(|spec| {
            let c = spec.build()?;
            let d = c.base_dim();
            let mut worst = 0.0f64;
            for _ in 0..sets {
                let g = AnalyticGraph::random(d, &mut rng);
                for _ in 0..POINTS_PER_SET {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-half_width..half_width)).collect();
                    worst = worst.max(relative_defect(&c, &g.jet(&x))?);
                }
            }
            Ok(DerivationRow {
                scenario: spec.id.clone(),
                dim: spec.dim,
                sets,
                points: sets * POINTS_PER_SET,
                max_relative: worst,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;

    /// Central differences of the jet's value and gradient against its
    /// gradient and Hessian.
    #[test]
    fn analytic_jet_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = AnalyticGraph::random(3, &mut rng);
        let x = [0.3, -0.2, 0.5];
        let j0 = g.jet(&x);
        let h = 1e-5;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let (jp, jm) = (g.jet(&xp), g.jet(&xm));
            assert!(((jp.u - jm.u) / (2.0 * h) - j0.p[i]).abs() < 1e-8);
            for k in 0..3 {
                assert!(((jp.p[k] - jm.p[k]) / (2.0 * h) - j0.hess[k][i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn identity_holds_on_the_catalog() {
        let specs: Vec<_> = [3, 4].into_iter().flat_map(catalog).collect();
        let rows = derivation_check(&specs, 4, 1.0, 7).unwrap();
        assert_eq!(rows.len(), 10);
        for r in rows {
            assert!(r.max_relative <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn same_seed_same_samples() {
        let specs = catalog(3);
        assert_eq!(derivation_check(&specs, 2, 1.0, 5).unwrap(), derivation_check(&specs, 2, 1.0, 5).unwrap());
    }
}
