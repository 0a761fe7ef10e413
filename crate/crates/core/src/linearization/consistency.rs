//! Convergence of divided differences to the linearized solves.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::divided::{divided_differences, levels_above, observed_slopes, EpsilonSchedule};
use super::operator::LinearizedOperator;
use super::second::solve_second_lin;
use crate::error::{config, Error};
use crate::forward::ForwardSolver;
use crate::geometry::ConformalFactor;
use crate::grid::{BoundaryField, Domain, Grid, ScalarField};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub eps: Vec<f64>,
    /// Interior sup error of the divided difference at each level.
    pub errors: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Longest run of levels whose slopes reach `min_slope`.
    pub levels_above: usize,
    pub min_slope: f64,
}

fn report(schedule: &EpsilonSchedule, errors: Vec<f64>, min_slope: f64) -> SlopeReport {
    let slopes = observed_slopes(&schedule.levels, &errors);
    SlopeReport {
        eps: schedule.levels.clone(),
        levels_above: levels_above(&slopes, min_slope),
        errors,
        slopes,
        min_slope,
    }
}

fn interior_gap(a: &ScalarField, b: &ScalarField) -> f64 {
    a.zip_with(b, |x, y| x - y).interior_sup_norm()
}

/// `(u(eps f) - u(-eps f)) / 2 eps` against the first linearization.
pub fn first_consistency(
    solver: &ForwardSolver,
    f: &BoundaryField,
    schedule: &EpsilonSchedule,
    min_slope: f64,
) -> Result<SlopeReport> {
    let v = solver.operator().solve_first(f)?;
    let dds = divided_differences(solver, std::slice::from_ref(f), schedule)?;
    let errors = dds.iter().map(|dd| interior_gap(&dd.u, &v)).collect();
    Ok(report(schedule, errors, min_slope))
}

/// Mixed second divided difference against `solve_second_lin`.
pub fn second_consistency(
    solver: &ForwardSolver,
    f1: &BoundaryField,
    f2: &BoundaryField,
    schedule: &EpsilonSchedule,
    min_slope: f64,
) -> Result<SlopeReport> {
    let op = solver.operator();
    let w = solve_second_lin(op, &op.solve_first(f1)?, &op.solve_first(f2)?)?;
    let dds = divided_differences(solver, &[f1.clone(), f2.clone()], schedule)?;
    let errors = dds.iter().map(|dd| interior_gap(&dd.u, &w)).collect();
    Ok(report(schedule, errors, min_slope))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormAgreement {
    pub nodes: Vec<usize>,
    /// Sup difference between convection-form and conductivity-form solves.
    pub errors: Vec<f64>,
    /// `errors[k] / errors[k + 1]`, close to 4 at second order.
    pub ratios: Vec<f64>,
}

/// Convection versus conductivity form of the first linearization on a
/// sequence of grids, `n = 3` only.
pub fn form_agreement(
    c: &Arc<ConformalFactor>,
    domain: &Domain,
    shape: &dyn Fn(&[f64]) -> f64,
    nodes: &[usize],
) -> Result<FormAgreement> {
    if c.dim() != 3 {
        return Err(Error::Unsupported("conductivity form needs n = 3".into()));
    }
    if nodes.len() < 2 {
        return config("form agreement needs at least two grids");
    }
    let errors = nodes
        .iter()
        .map(|&n| {
            let grid = Arc::new(Grid::uniform(domain.clone(), n)?);
            let op = LinearizedOperator::new(c.clone(), grid.clone())?;
            let f = BoundaryField::from_fn(grid, shape);
            let a = op.solve_first(&f)?;
            let b = op.conductivity_problem()?.solve(None, &f)?.0;
            Ok(a.zip_with(&b, |x, y| x - y).sup_norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(FormAgreement {
        nodes: nodes.to_vec(),
        errors,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{BoundaryShape, NewtonConfig};
    use crate::geometry::ScenarioSpec;

    fn solver(id: &str, n: usize) -> ForwardSolver {
        let c = Arc::new(ScenarioSpec::new(id, 3).build().unwrap());
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), n).unwrap());
        ForwardSolver::new(c, g, NewtonConfig::default()).unwrap()
    }

    #[test]
    fn first_difference_converges_at_second_order() {
        let s = solver("graded-cubic", 17);
        let f = BoundaryShape::Trig { k: vec![1.0, 2.0], phase: 0.2 }.normalized(s.grid()).unwrap();
        let r = first_consistency(&s, &f, &EpsilonSchedule::dyadic(0.04, 4), 1.8).unwrap();
        assert!(r.levels_above >= 3, "{r:?}");
    }

    #[test]
    fn second_difference_converges() {
        let s = solver("bump-cubic", 17);
        let f1 = BoundaryShape::Constant.normalized(s.grid()).unwrap();
        let f2 = BoundaryShape::Affine { a: vec![1.0, -0.5] }.normalized(s.grid()).unwrap();
        let r = second_consistency(&s, &f1, &f2, &EpsilonSchedule::dyadic(0.02, 4), 1.5).unwrap();
        assert!(r.levels_above >= 3, "{r:?}");
    }

    #[test]
    fn forms_agree_at_second_order() {
        let c = Arc::new(ScenarioSpec::new("graded-cubic", 3).build().unwrap());
        let dom = Domain::cube(2, 1.0).unwrap();
        let r = form_agreement(&c, &dom, &|x| (x[0] - 0.3 * x[1]).sin(), &[17, 33]).unwrap();
        assert!((3.5..=4.5).contains(&r.ratios[0]), "{r:?}");
    }
}
