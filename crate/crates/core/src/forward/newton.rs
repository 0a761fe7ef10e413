//! Damped Newton iteration for the discrete Dirichlet problem.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::boundary::surrogate_norm;
use super::discrete::{jacobian, residual};
use crate::error::{config, Error};
use crate::geometry::ConformalFactor;
use crate::grid::{BoundaryField, Grid, NodeField, ScalarField};
use crate::linalg::{solve_preconditioned, LinearSolver, SolveStats, SolverKind};
use crate::linearization::operator::LinearizedOperator;
use crate::Result;

/// Pivot ratio of the frozen linearization below which a run is flagged as
/// near-singular.
pub const NEAR_SINGULAR_PIVOT: f64 = 1e-8;

/// Residual level below which the quadratic tail is measured.
pub const QUADRATIC_TAIL_ONSET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    /// Sup norm of the interior residual that counts as converged.
    pub residual_tolerance: f64,
    /// Newton updates allowed per continuation stage.
    pub max_iterations: usize,
    /// Step halvings allowed per update.
    pub max_backtracks: usize,
    /// Number of amplitude ramps used when the direct attempt fails.
    pub continuation_steps: usize,
    /// Admission gate on the surrogate norm of the boundary data.
    pub amplitude_bound: f64,
    pub solver: SolverKind,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            residual_tolerance: 1e-11,
            max_iterations: 25,
            max_backtracks: 20,
            continuation_steps: 4,
            amplitude_bound: 0.05,
            solver: SolverKind::Auto,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tolerance > 0.0) {
            return config("residual tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return config("max_iterations must be at least 1");
        }
        if self.continuation_steps == 0 {
            return config("continuation_steps must be at least 1");
        }
        if !(self.amplitude_bound > 0.0) {
            return config("amplitude bound must be positive");
        }
        Ok(())
    }
}

/// Converged solution and Newton diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScalarField,
    /// Newton updates over all continuation stages.
    pub iterations: usize,
    /// Sup norm of the residual before the first update and after each one,
    /// concatenated over continuation stages.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Continuation stages used; 1 means the data was reached directly.
    pub stages: usize,
    /// Pivot ratio of the frozen linearization, when factored directly.
    pub pivot_ratio: Option<f64>,
    pub near_singular: bool,
    /// Worst relative residual over all linear solves.
    pub linear_residual: f64,
}

impl SolveResult {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }

    /// Largest `r_{k+1} / r_k^2` over the tail where `r_k <= 1e-4`.
    pub fn quadratic_tail_constant(&self) -> Option<f64> {
        quadratic_tail_constant(&self.residual_history)
    }

    pub fn has_quadratic_tail(&self, bound: f64) -> bool {
        has_quadratic_tail(&self.residual_history, bound)
    }
}

/// Residuals below this are roundoff; a step landing there carries no
/// information about the contraction constant.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Largest `r_{k+1} / r_k^2` over steps that start below the onset and end
/// above the roundoff floor.
pub fn quadratic_tail_constant(history: &[f64]) -> Option<f64> {
    history
        .windows(2)
        .filter(|w| w[0] <= QUADRATIC_TAIL_ONSET && w[0] > 0.0 && w[1] >= ROUNDOFF_FLOOR)
        .map(|w| w[1] / (w[0] * w[0]))
        .reduce(f64::max)
}

/// A tail is quadratic when every step from below the onset either obeys
/// `r_{k+1} <= bound r_k^2` or drops straight to the roundoff floor, and at
/// least one such step exists.
pub fn has_quadratic_tail(history: &[f64], bound: f64) -> bool {
    let steps: Vec<&[f64]> = history
        .windows(2)
        .filter(|w| w[0] <= QUADRATIC_TAIL_ONSET && w[0] > 0.0)
        .collect();
    !steps.is_empty()
        && steps
            .iter()
            .all(|w| w[1] < ROUNDOFF_FLOOR || w[1] <= bound * w[0] * w[0])
}

/// Newton solver bound to one factor and grid. The factorization of the
/// linearization at `u = 0` is computed once and preconditions every step.
#[derive(Debug, Clone)]
pub struct ForwardSolver {
    op: Arc<LinearizedOperator>,
    cfg: NewtonConfig,
}

struct Stage {
    u: Vec<f64>,
    iterations: usize,
    history: Vec<f64>,
    linear_residual: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl ForwardSolver {
    pub fn new(c: Arc<ConformalFactor>, grid: Arc<Grid>, cfg: NewtonConfig) -> Result<Self> {
        cfg.validate()?;
        let op = LinearizedOperator::with_solver(c, grid, cfg.solver)?;
        Ok(ForwardSolver { op: Arc::new(op), cfg })
    }

    /// Shares an existing linearization, for example with the linearization
    /// solvers, so the factorization is reused.
    pub fn with_operator(op: Arc<LinearizedOperator>, cfg: NewtonConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(ForwardSolver { op, cfg })
    }

    pub fn operator(&self) -> &Arc<LinearizedOperator> {
        &self.op
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.op.grid()
    }

    pub fn factor(&self) -> &Arc<ConformalFactor> {
        self.op.factor()
    }

    pub fn config(&self) -> &NewtonConfig {
        &self.cfg
    }

    /// Rejects data outside the small-data regime.
    pub fn admit(&self, f: &BoundaryField) -> Result<f64> {
        let norm = surrogate_norm(f);
        if norm > self.cfg.amplitude_bound * (1.0 + 1e-12) {
            return Err(Error::SmallDataRegime {
                norm,
                bound: self.cfg.amplitude_bound,
            });
        }
        Ok(norm)
    }

    /// Solves `F = 0` in the interior with `u = f` on the boundary. Tries the
    /// data directly and falls back to an amplitude ramp.
    pub fn solve(&self, f: &BoundaryField) -> Result<SolveResult> {
        self.admit(f)?;
        match self.solve_with_continuation(f, 1) {
            Ok(r) => Ok(r),
            Err(Error::NonConvergence { .. }) if self.cfg.continuation_steps > 1 => {
                log::debug!("direct Newton failed, ramping in {} stages", self.cfg.continuation_steps);
                self.solve_with_continuation(f, self.cfg.continuation_steps)
            }
            Err(e) => Err(e),
        }
    }

    /// Reaches `f` through `stages` equal amplitude ramps, each started from
    /// the previous solution. Skips the admission gate.
    pub fn solve_with_continuation(&self, f: &BoundaryField, stages: usize) -> Result<SolveResult> {
        if f.grid().as_ref() != self.grid().as_ref() {
            return config("boundary data lives on a different grid");
        }
        let stages = stages.max(1);
        let grid = self.grid();
        let mut u = vec![0.0; grid.len()];
        let mut iterations = 0;
        let mut history = Vec::new();
        let mut linear_residual: f64 = 0.0;
        for s in 1..=stages {
            // Lift the data increment with the linearized solve, so the
            // starting iterate has no boundary layer.
            let dt = 1.0 / stages as f64;
            let lift = self.op.solve_first(&f.scale(dt))?;
            for (ui, li) in u.iter_mut().zip(lift.values()) {
                *ui += li;
            }
            let data = f.scale(s as f64 * dt).extend(0.0);
            for &node in grid.boundary() {
                u[node] = data.get(node);
            }
            let stage = self.newton(u).map_err(|e| match e {
                Error::NonConvergence {
                    iterations: k,
                    last,
                    history: h,
                    reason,
                } => Error::NonConvergence {
                    iterations: iterations + k,
                    last,
                    history: history.iter().chain(&h).copied().collect(),
                    reason: format!("stage {s} of {stages}: {reason}"),
                },
                other => other,
            })?;
            iterations += stage.iterations;
            history.extend(stage.history);
            linear_residual = linear_residual.max(stage.linear_residual);
            u = stage.u;
        }
        let pivot_ratio = self.op.convection_problem()?.solver().pivot_ratio();
        Ok(SolveResult {
            u: NodeField::new(grid.clone(), u)?,
            iterations,
            residual_history: history,
            converged: true,
            stages,
            pivot_ratio,
            near_singular: pivot_ratio.is_some_and(|p| p < NEAR_SINGULAR_PIVOT),
            linear_residual,
        })
    }

    /// Newton step `J du = -r` preconditioned by the frozen factor.
    fn step(&self, u: &[f64], r: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let c = self.factor();
        let grid = self.grid();
        let j = jacobian(c, grid, u)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let frozen = self.op.convection_problem()?;
        match solve_preconditioned(&j, &rhs, frozen.solver().preconditioner(), None) {
            Ok(out) => Ok(out),
            Err(Error::LinearSolve(msg)) => {
                log::debug!("frozen preconditioner failed ({msg}), factoring the Jacobian");
                LinearSolver::new(j, self.cfg.solver)?.solve(&rhs)
            }
            Err(e) => Err(e),
        }
    }

    fn newton(&self, mut u: Vec<f64>) -> Result<Stage> {
        let c = self.factor();
        let grid = self.grid();
        let tol = self.cfg.residual_tolerance;
        let mut r = residual(c, grid, &u)?;
        let mut norm = sup(&r);
        let mut hist = vec![norm];
        let mut iterations = 0;
        let mut linear_residual: f64 = 0.0;
        let fail = |iterations: usize, hist: &[f64], reason: String| Error::NonConvergence {
                iterations,
                last: *hist.last().unwrap(),
                history: hist.to_vec(),
                reason,
        };
        while norm > tol {
            if iterations == self.cfg.max_iterations {
                return Err(fail(iterations, &hist, "iteration limit reached".into()));
            }
            let (du, stats) = self.step(&u, &r)?;
            linear_residual = linear_residual.max(stats.relative_residual);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=self.cfg.max_backtracks {
                let mut trial = u.clone();
                for (k, &node) in grid.interior().iter().enumerate() {
                    trial[node] += lambda * du[k];
                }
                // A trial that leaves the domain of the factor is rejected
                // like one that fails to decrease the residual.
                let Ok(rt) = residual(c, grid, &trial) else {
                    lambda *= 0.5;
                    continue;
                };
                let nt = sup(&rt);
                if nt.is_finite() && nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
                lambda *= 0.5;
            }
            let Some((trial, rt, nt)) = accepted else {
                return Err(fail(
                    iterations,
                    &hist,
                    format!("no residual decrease after {} step halvings", self.cfg.max_backtracks),
                ));
            };
            u = trial;
            r = rt;
            norm = nt;
            iterations += 1;
            hist.push(norm);
        }
        Ok(Stage {
            u,
            iterations,
            history: hist,
            linear_residual,
        })
    }
}

/// One-shot convenience wrapper around [`ForwardSolver`].
pub fn solve_mse(c: Arc<ConformalFactor>, f: &BoundaryField, cfg: NewtonConfig) -> Result<SolveResult> {
    ForwardSolver::new(c, f.grid().clone(), cfg)?.solve(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::boundary::BoundaryShape;
    use crate::geometry::ScenarioSpec;
    use crate::grid::Domain;

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), n).unwrap())
    }

    fn bump() -> Arc<ConformalFactor> {
        Arc::new(ScenarioSpec::new("bump-cubic", 3).with_alpha(4.0).build().unwrap())
    }

    #[test]
    fn zero_data_needs_no_update() {
        for id in ["flat", "bump-cubic", "quartic", "exp-cubic", "graded-cubic"] {
            let c = Arc::new(ScenarioSpec::new(id, 3).build().unwrap());
            let g = grid(17);
            let r = solve_mse(c, &BoundaryField::zeros(g), NewtonConfig::default()).unwrap();
            assert_eq!(r.iterations, 0, "{id}");
            assert_eq!(r.u.sup_norm(), 0.0);
        }
    }

    #[test]
    fn planes_are_reproduced_in_flat_space() {
        let c = Arc::new(ConformalFactor::constant(3, 1.0).unwrap());
        let g = grid(17);
        let f = BoundaryField::from_fn(g.clone(), |x| 0.01 * x[0] - 0.02 * x[1]);
        let r = solve_mse(c, &f, NewtonConfig::default()).unwrap();
        let exact = ScalarField::from_fn(g, |x| 0.01 * x[0] - 0.02 * x[1]);
        assert!(r.u.zip_with(&exact, |a, b| a - b).sup_norm() < 1e-14);
    }

    #[test]
    fn bump_scenario_converges_quadratically() {
        let g = grid(33);
        let f = BoundaryShape::Trig { k: vec![1.5, -2.0], phase: 0.3 }
            .normalized(&g)
            .unwrap()
            .scale(0.05);
        let r = solve_mse(bump(), &f, NewtonConfig::default()).unwrap();
        assert!(r.converged && r.final_residual() <= 1e-11);
        assert!(r.residual_history.windows(2).all(|w| w[1] < w[0]));
        assert!(r.iterations <= 6, "{:?}", r.residual_history);
        assert!(r.has_quadratic_tail(1e4), "{:?}", r.residual_history);
        assert!((quadratic_tail_constant(&[1e-5, 1e-9, 1e-15]).unwrap() - 10.0).abs() < 1e-9);
        assert!(!has_quadratic_tail(&[1e-5, 5e-6, 1e-15], 1e4));
        assert!(!r.near_singular);
    }

    #[test]
    fn large_data_is_rejected() {
        let g = grid(17);
        let f = BoundaryField::from_fn(g, |_| 0.2);
        match solve_mse(bump(), &f, NewtonConfig::default()) {
            Err(Error::SmallDataRegime { norm, bound }) => assert!(norm > bound),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn continuation_paths_agree() {
        let g = grid(33);
        let f = BoundaryShape::Gaussian { center: vec![0.3, -0.2], width: 0.6 }
            .normalized(&g)
            .unwrap()
            .scale(0.05);
        let s = ForwardSolver::new(bump(), g, NewtonConfig::default()).unwrap();
        let a = s.solve_with_continuation(&f, 1).unwrap();
        let b = s.solve_with_continuation(&f, 3).unwrap();
        assert_eq!(b.stages, 3);
        assert!(a.u.zip_with(&b.u, |p, q| p - q).sup_norm() < 1e-10);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = NewtonConfig {
            residual_tolerance: 0.0,
            ..NewtonConfig::default()
        };
        assert!(ForwardSolver::new(bump(), grid(9), bad).is_err());
    }
}
