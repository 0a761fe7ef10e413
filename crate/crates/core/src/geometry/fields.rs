//! Residual forms evaluated over a grid, from either discrete or analytic
//! derivatives of `u`.

use std::sync::Arc;

use super::factor::ConformalFactor;
use super::residual::{divergence_form, eval_f, implicit_form, JetPoint};
use crate::grid::stencil::{d1, gradient_fd, hessian_fd, Matrix, Vector};
use crate::grid::{Grid, NodeField, ScalarField};
use crate::Result;

/// Supplies the jet of `u` and the Euclidean flux divergence at grid nodes.
pub trait JetSource: Sync {
    fn grid(&self) -> &Arc<Grid>;
    fn jet(&self, node: usize) -> JetPoint;
    /// `sum_j d_j (d_j u / sqrt(1 + |grad u|^2))`.
    fn flux_divergence(&self, node: usize) -> f64;
}

/// Derivatives of a grid function by finite differences. The flux divergence
/// differentiates the discrete flux field, which is a genuinely different
/// route from the pointwise chain rule.
#[derive(Debug, Clone)]
pub struct GridJets {
    u: ScalarField,
    grad: Vec<Vector<f64>>,
    hess: Vec<Matrix<f64>>,
    flux_div: Vec<f64>,
}

impl GridJets {
    pub fn new(u: &ScalarField) -> Self {
        let grid = u.grid().clone();
        let d = grid.dim();
        let grad = gradient_fd(u);
        let hess = hessian_fd(u);
        let mut flux_div = vec![0.0; grid.len()];
        for j in 0..d {
            let flux: Vec<f64> = grad
                .iter()
                .map(|g| {
                    let w = 1.0 + g[..d].iter().map(|v| v * v).sum::<f64>();
                    g[j] / w.sqrt()
                })
                .collect();
            for (node, acc) in flux_div.iter_mut().enumerate() {
                *acc += d1(&grid, &flux, node, j);
            }
        }
        GridJets {
            u: u.clone(),
            grad,
            hess,
            flux_div,
        }
    }
}

impl JetSource for GridJets {
    fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    fn jet(&self, node: usize) -> JetPoint {
        let grid = self.u.grid();
        let d = grid.dim();
        let x = grid.coord(node);
        let mut jet = JetPoint {
            dim: d,
            x_prime: x,
            u: self.u.get(node),
            p: self.grad[node],
            hess: self.hess[node],
        };
        jet.x_prime[d..].iter_mut().for_each(|v| *v = 0.0);
        jet
    }

    fn flux_divergence(&self, node: usize) -> f64 {
        self.flux_div[node]
    }
}

/// Exact jet of `u` at a point: value, gradient and Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactJet {
    pub u: f64,
    pub p: Vector<f64>,
    pub hess: Matrix<f64>,
}

/// Analytic provider: derivatives of `u` come from a closure.
pub struct AnalyticJets<F> {
    grid: Arc<Grid>,
    f: F,
}

impl<F: Fn(&[f64]) -> ExactJet + Sync> AnalyticJets<F> {
    pub fn new(grid: Arc<Grid>, f: F) -> Self {
        AnalyticJets { grid, f }
    }
}

impl<F: Fn(&[f64]) -> ExactJet + Sync> JetSource for AnalyticJets<F> {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn jet(&self, node: usize) -> JetPoint {
        let d = self.grid.dim();
        let x = self.grid.coord(node);
        let e = (self.f)(&x[..d]);
        JetPoint {
            dim: d,
            x_prime: x,
            u: e.u,
            p: e.p,
            hess: e.hess,
        }
    }

    fn flux_divergence(&self, node: usize) -> f64 {
        self.jet(node).flux_divergence()
    }
}

fn pointwise(source: &dyn JetSource, f: impl Fn(usize, &JetPoint) -> Result<f64>) -> Result<ScalarField> {
    let grid = source.grid().clone();
    let values = (0..grid.len())
        .map(|node| f(node, &source.jet(node)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(NodeField::from_raw(grid, values))
}

/// Graph form `F(x', u, grad u, Hess u)` at every node.
pub fn graph_residual(c: &ConformalFactor, source: &dyn JetSource) -> Result<ScalarField> {
    pointwise(source, |_, jet| eval_f(c, jet))
}

/// Implicit (level set) form at every node; equals `(1 + |grad u|^2)` times
/// the graph form.
pub fn implicit_residual(c: &ConformalFactor, source: &dyn JetSource) -> Result<ScalarField> {
    pointwise(source, |_, jet| implicit_form(c, jet))
}

/// Divergence form at every node; the graph form is `sqrt(1 + |grad u|^2)`
/// times this.
pub fn divergence_residual(c: &ConformalFactor, source: &dyn JetSource) -> Result<ScalarField> {
    pointwise(source, |node, jet| divergence_form(c, jet, source.flux_divergence(node)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog::{catalog, ScenarioSpec};
    use crate::geometry::residual::divergence_to_graph_factor;
    use crate::grid::Domain;

    /// Scherk's surface `log(cos x / cos y)` solves the Euclidean equation.
    fn scherk(x: &[f64]) -> ExactJet {
        let (t0, t1) = (x[0].tan(), x[1].tan());
        let (s0, s1) = (1.0 / x[0].cos().powi(2), 1.0 / x[1].cos().powi(2));
        ExactJet {
            u: (x[0].cos() / x[1].cos()).ln(),
            p: [-t0, t1, 0.0],
            hess: [[-s0, 0.0, 0.0], [0.0, s1, 0.0], [0.0; 3]],
        }
    }

    fn scherk_grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(Domain::cube(2, 0.6).unwrap(), n).unwrap())
    }

    #[test]
    fn scherk_is_minimal_analytically() {
        let c = ConformalFactor::constant(3, 1.0).unwrap();
        let g = scherk_grid(9);
        let r = graph_residual(&c, &AnalyticJets::new(g.clone(), scherk)).unwrap();
        assert!(r.sup_norm() < 1e-12);
        let r = divergence_residual(&c, &AnalyticJets::new(g, scherk)).unwrap();
        assert!(r.sup_norm() < 1e-12);
    }

    #[test]
    fn scherk_discrete_residuals_converge_at_second_order() {
        let c = ConformalFactor::constant(3, 1.0).unwrap();
        let err = |n: usize, div: bool| {
            let g = scherk_grid(n);
            let u = ScalarField::from_fn(g.clone(), |x| scherk(x).u);
            let jets = GridJets::new(&u);
            let r = if div {
                divergence_residual(&c, &jets).unwrap()
            } else {
                graph_residual(&c, &jets).unwrap()
            };
            // The flux divergence at the first interior layer differences a
            // one-sided boundary flux, so measure two layers in.
            g.interior()
                .iter()
                .filter(|&&k| g.index(k)[..2].iter().all(|&i| i >= 2 && i + 3 <= n))
                .map(|&k| r.get(k).abs())
                .fold(0.0, f64::max)
        };
        for div in [false, true] {
            let ratio = err(33, div) / err(65, div);
            assert!(ratio > 3.3 && ratio < 4.7, "div={div}: ratio {ratio}");
        }
    }

    #[test]
    fn admissible_zero_graph_has_zero_residuals() {
        for dim in [3, 4] {
            let g = Arc::new(Grid::uniform(Domain::cube(dim - 1, 1.0).unwrap(), 9).unwrap());
            for spec in catalog(dim) {
                let c = spec.build().unwrap();
                let jets = GridJets::new(&ScalarField::zeros(g.clone()));
                assert_eq!(graph_residual(&c, &jets).unwrap().sup_norm(), 0.0);
                assert_eq!(implicit_residual(&c, &jets).unwrap().sup_norm(), 0.0);
                assert_eq!(divergence_residual(&c, &jets).unwrap().sup_norm(), 0.0);
            }
        }
    }

    #[test]
    fn forms_differ_by_the_documented_factors() {
        let c = ScenarioSpec::new("graded-cubic", 3).with_alpha(4.0).build().unwrap();
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), 9).unwrap());
        let u = |x: &[f64]| ExactJet {
            u: 0.3 * x[0] * x[1] + 0.2 * x[0].powi(3),
            p: [0.3 * x[1] + 0.6 * x[0] * x[0], 0.3 * x[0], 0.0],
            hess: [[1.2 * x[0], 0.3, 0.0], [0.3, 0.0, 0.0], [0.0; 3]],
        };
        let src = AnalyticJets::new(g.clone(), u);
        let gr = graph_residual(&c, &src).unwrap();
        let im = implicit_residual(&c, &src).unwrap();
        let dv = divergence_residual(&c, &src).unwrap();
        for node in 0..g.len() {
            let jet = src.jet(node);
            let w = jet.w();
            assert!((im.get(node) - w * gr.get(node)).abs() <= 1e-12 * (1.0 + im.get(node).abs()));
            let f = divergence_to_graph_factor(&jet);
            assert!((gr.get(node) - f * dv.get(node)).abs() <= 1e-12 * (1.0 + gr.get(node).abs()));
        }
    }
}
