//! The first linearization `L v = Lap v + b . grad v` at `u = 0` and its
//! relatives, discretized with the same centred stencils as the Newton
//! residual.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{domain, Error};
use crate::geometry::{ConformalFactor, MAX_BASE_DIM};
use crate::grid::{BoundaryField, ComplexBoundaryField, ComplexField, FieldValue, Grid, NodeField, ScalarField, SampleField};
use crate::linalg::{CsrBuilder, CsrMatrix, LinearSolver, SolveStats, SolverKind};
use crate::Result;

/// Stencil entries `(node, coefficient)` of one row.
pub type Row = Vec<(usize, f64)>;

/// Interior rows of a linear stencil operator, split into the part acting
/// on interior unknowns and the coupling to boundary nodes.
#[derive(Debug, Clone)]
pub struct Assembled {
    /// `sign * L` restricted to interior unknowns.
    pub matrix: CsrMatrix,
    /// `L` restricted to boundary columns, indexed by node.
    pub coupling: CsrMatrix,
    pub sign: f64,
}

/// Assembles `sign * L` for rows produced by `row` at every interior node.
pub fn assemble(grid: &Grid, sign: f64, mut row: impl FnMut(usize) -> Row) -> Assembled {
    let n = grid.interior().len();
    let width = 2 * grid.dim() * grid.dim() + 1;
    let mut a = CsrBuilder::new(n, n * width);
    let mut b = CsrBuilder::new(grid.len(), 4 * grid.boundary().len());
    for &node in grid.interior() {
        for (j, coef) in row(node) {
            match grid.unknown_index(j) {
                Some(k) => a.push(k, sign * coef),
                None => b.push(j, coef),
            }
        }
        a.finish_row();
        b.finish_row();
    }
    Assembled {
        matrix: a.build(),
        coupling: b.build(),
        sign,
    }
}

/// A factored Dirichlet problem `L v = s` in the interior, `v = g` on the
/// boundary.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    grid: Arc<Grid>,
    solver: LinearSolver,
    coupling: CsrMatrix,
    sign: f64,
}

impl DirichletProblem {
    pub fn new(grid: Arc<Grid>, assembled: Assembled, kind: SolverKind) -> Result<Self> {
        let solver = LinearSolver::new(assembled.matrix, kind).map_err(|e| match e {
            Error::Singular(msg) => Error::Singular(format!("discrete operator is singular: {msg}")),
            other => other,
        })?;
        Ok(DirichletProblem {
            grid,
            solver,
            coupling: assembled.coupling,
            sign: assembled.sign,
        })
    }

    pub fn solver(&self) -> &LinearSolver {
        &self.solver
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Real solve; `source` is read at interior nodes only.
    pub fn solve(&self, source: Option<&ScalarField>, g: &BoundaryField) -> Result<(ScalarField, SolveStats)> {
        let grid = &self.grid;
        let bvals = g.extend(0.0);
        let cg = self.coupling.mul_vec(bvals.values());
        let rhs: Vec<f64> = grid
            .interior()
            .iter()
            .enumerate()
            .map(|(k, &node)| {
                let s = source.map(|s| s.get(node)).unwrap_or(0.0);
                self.sign * (s - cg[k])
            })
            .collect();
        let (x, stats) = self.solver.solve(&rhs)?;
        let mut values = bvals.into_values();
        for (k, &node) in grid.interior().iter().enumerate() {
            values[node] = x[k];
        }
        Ok((NodeField::new(grid.clone(), values)?, stats))
    }

    /// Complex solve as two real solves.
    pub fn solve_complex(
        &self,
        source: Option<&ComplexField>,
        g: &ComplexBoundaryField,
    ) -> Result<(ComplexField, SolveStats)> {
        let (re, s1) = self.solve(source.map(|s| s.re()).as_ref(), &g.re())?;
        let (im, s2) = self.solve(source.map(|s| s.im()).as_ref(), &g.im())?;
        let stats = SolveStats {
            relative_residual: s1.relative_residual.max(s2.relative_residual),
            iterations: s1.iterations + s2.iterations,
            direct: s1.direct,
        };
        Ok((re.zip_with(&im, |a, b| Complex64::new(a, b)), stats))
    }
}

/// Data of the first linearization at `u = 0` for one factor on one grid.
#[derive(Debug)]
pub struct LinearizedOperator {
    grid: Arc<Grid>,
    c: Arc<ConformalFactor>,
    /// `b = (n-1) grad' c(x', 0) / (2 c(x', 0))` at every node.
    b: Vec<[f64; MAX_BASE_DIM]>,
    /// `gamma = c(x', 0)` at every node.
    gamma: Vec<f64>,
    kind: SolverKind,
    convection: OnceLock<Arc<DirichletProblem>>,
}

impl LinearizedOperator {
    pub fn new(c: Arc<ConformalFactor>, grid: Arc<Grid>) -> Result<Self> {
        Self::with_solver(c, grid, SolverKind::Auto)
    }

    pub fn with_solver(c: Arc<ConformalFactor>, grid: Arc<Grid>, kind: SolverKind) -> Result<Self> {
        let d = grid.dim();
        if c.base_dim() != d {
            return domain(format!(
                "factor has base dimension {}, grid has dimension {d}",
                c.base_dim()
            ));
        }
        let k = c.dim() as f64 - 1.0;
        let mut b = Vec::with_capacity(grid.len());
        let mut gamma = Vec::with_capacity(grid.len());
        for node in 0..grid.len() {
            let xp = grid.coord(node);
            let t = c.normal_taylor(&xp[..d], 0);
            let (c0, g0) = t[0];
            if !(c0 > 0.0) {
                return domain(format!("conformal factor is not positive at {:?}", &xp[..d]));
            }
            let mut bb = [0.0; MAX_BASE_DIM];
            for a in 0..d {
                bb[a] = k * g0[a] / (2.0 * c0);
            }
            b.push(bb);
            gamma.push(c0);
        }
        Ok(LinearizedOperator {
            grid,
            c,
            b,
            gamma,
            kind,
            convection: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn factor(&self) -> &Arc<ConformalFactor> {
        &self.c
    }

    pub fn solver_kind(&self) -> SolverKind {
        self.kind
    }

    pub fn convection(&self) -> &[[f64; MAX_BASE_DIM]] {
        &self.b
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn n_equals_3(&self) -> bool {
        self.c.dim() == 3
    }

    fn gamma_at(&self, node: usize, axis: usize, half: f64) -> f64 {
        let d = self.grid.dim();
        let mut x = self.grid.coord(node);
        x[axis] += half * self.grid.spacing()[axis];
        self.c.normal_taylor(&x[..d], 0)[0].0
    }

    /// Row of `Lap_h + b . D_h` at an interior node.
    pub fn convection_row(&self, node: usize) -> Row {
        let grid = &self.grid;
        let mut row = Vec::with_capacity(2 * grid.dim() + 1);
        let mut center = 0.0;
        for a in 0..grid.dim() {
            let h = grid.spacing()[a];
            let s = grid.stride(a);
            let ba = self.b[node][a];
            row.push((node + s, 1.0 / (h * h) + ba / (2.0 * h)));
            row.push((node - s, 1.0 / (h * h) - ba / (2.0 * h)));
            center -= 2.0 / (h * h);
        }
        row.push((node, center));
        row
    }

    /// Row of `div_h(gamma grad_h v)` with `gamma` at half-way points.
    pub fn conductivity_row(&self, node: usize) -> Row {
        let grid = &self.grid;
        let mut row = Vec::with_capacity(2 * grid.dim() + 1);
        let mut center = 0.0;
        for a in 0..grid.dim() {
            let h = grid.spacing()[a];
            let s = grid.stride(a);
            let gp = self.gamma_at(node, a, 0.5);
            let gm = self.gamma_at(node, a, -0.5);
            row.push((node + s, gp / (h * h)));
            row.push((node - s, gm / (h * h)));
            center -= (gp + gm) / (h * h);
        }
        row.push((node, center));
        row
    }

    /// Factored convection-form Dirichlet problem, built on first use.
    pub fn convection_problem(&self) -> Result<Arc<DirichletProblem>> {
        if let Some(p) = self.convection.get() {
            return Ok(p.clone());
        }
        let assembled = assemble(&self.grid, -1.0, |node| self.convection_row(node));
        let p = Arc::new(DirichletProblem::new(self.grid.clone(), assembled, self.kind)?);
        Ok(self.convection.get_or_init(|| p).clone())
    }

    /// Conductivity-form Dirichlet problem `div(gamma grad w) = s`.
    pub fn conductivity_problem(&self) -> Result<DirichletProblem> {
        let assembled = assemble(&self.grid, -1.0, |node| self.conductivity_row(node));
        DirichletProblem::new(self.grid.clone(), assembled, self.kind)
    }

    fn apply_rows<T: FieldValue>(&self, v: &NodeField<T>, row: impl Fn(usize) -> Row) -> NodeField<T> {
        let mut out = vec![T::zero(); self.grid.len()];
        for &node in self.grid.interior() {
            let mut acc = T::zero();
            for (j, coef) in row(node) {
                acc += v.get(j) * coef;
            }
            out[node] = acc;
        }
        NodeField::from_raw(self.grid.clone(), out)
    }

    /// `Lap_h v + b . D_h v` at interior nodes, zero on the boundary.
    pub fn apply_convection<T: FieldValue>(&self, v: &NodeField<T>) -> NodeField<T> {
        self.apply_rows(v, |n| self.convection_row(n))
    }

    /// `div_h(gamma grad_h v) / gamma` at interior nodes.
    pub fn apply_conductivity<T: FieldValue>(&self, v: &NodeField<T>) -> NodeField<T> {
        self.apply_rows(v, |n| {
            let g = self.gamma[n];
            self.conductivity_row(n).into_iter().map(|(j, c)| (j, c / g)).collect()
        })
    }

    /// Formal adjoint `Lap_h phi - div_h(phi b)` at interior nodes.
    pub fn apply_adjoint<T: FieldValue>(&self, phi: &NodeField<T>) -> NodeField<T> {
        let grid = &self.grid;
        self.apply_rows(phi, |node| {
            let mut row = Vec::with_capacity(2 * grid.dim() + 1);
            let mut center = 0.0;
            for a in 0..grid.dim() {
                let h = grid.spacing()[a];
                let s = grid.stride(a);
                row.push((node + s, 1.0 / (h * h) - self.b[node + s][a] / (2.0 * h)));
                row.push((node - s, 1.0 / (h * h) + self.b[node - s][a] / (2.0 * h)));
                center -= 2.0 / (h * h);
            }
            row.push((node, center));
            row
        })
    }

    /// Solves the first linearization with real Dirichlet data.
    pub fn solve_first(&self, f: &BoundaryField) -> Result<ScalarField> {
        Ok(self.convection_problem()?.solve(None, f)?.0)
    }

    pub fn solve_first_complex(&self, f: &ComplexBoundaryField) -> Result<ComplexField> {
        Ok(self.convection_problem()?.solve_complex(None, f)?.0)
    }

    /// Solves `L w = s` with zero Dirichlet data.
    pub fn solve_source(&self, source: &ScalarField) -> Result<ScalarField> {
        let zero = SampleField::zeros(self.grid.clone());
        Ok(self.convection_problem()?.solve(Some(source), &zero)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScenarioSpec;
    use crate::grid::quadrature::integrate_interior;
    use crate::grid::Domain;

    fn setup(id: &str, n: usize) -> LinearizedOperator {
        let c = Arc::new(ScenarioSpec::new(id, 3).build().unwrap());
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), n).unwrap());
        LinearizedOperator::new(c, g).unwrap()
    }

    #[test]
    fn constants_are_preserved() {
        for id in ["graded-cubic", "exp-cubic"] {
            let op = setup(id, 17);
            let one = BoundaryField::from_fn(op.grid().clone(), |_| 1.0);
            let v = op.solve_first(&one).unwrap();
            assert!(v.values().iter().all(|x| (x - 1.0).abs() < 1e-11), "{id}");
        }
    }

    #[test]
    fn convection_and_conductivity_agree_at_second_order() {
        let err = |n: usize| {
            let op = setup("graded-cubic", n);
            let v = ScalarField::from_fn(op.grid().clone(), |x| (1.3 * x[0] - 0.4 * x[1]).sin() + x[0] * x[1]);
            let a = op.apply_convection(&v);
            let b = op.apply_conductivity(&v);
            a.zip_with(&b, |p, q| p - q).sup_norm()
        };
        let ratio = err(33) / err(65);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn adjoint_pairing_is_second_order() {
        let defect = |n: usize| {
            let op = setup("graded-cubic", n);
            let g = op.grid().clone();
            let phi = ScalarField::from_fn(g.clone(), |x| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                if r2 < 0.64 {
                    (1.0 - r2 / 0.64).powi(4)
                } else {
                    0.0
                }
            });
            let v = ScalarField::from_fn(g.clone(), |x| (x[0] + 0.5 * x[1]).exp());
            let lhs = integrate_interior(&v.zip_with(&op.apply_adjoint(&phi), |a, b| a * b));
            let rhs = integrate_interior(&phi.zip_with(&op.apply_convection(&v), |a, b| a * b));
            (lhs - rhs).abs()
        };
        let (d1, d2) = (defect(33), defect(65));
        assert!(d2 < d1 / 3.0 || d2 < 1e-12, "{d1} {d2}");
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let c = Arc::new(ScenarioSpec::new("flat", 4).build().unwrap());
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), 9).unwrap());
        assert!(LinearizedOperator::new(c, g).is_err());
    }
}
