//! Contrapositive check of the uniqueness theorem: two factors that first
//! differ at normal order `k` must have DN maps whose divided differences
//! separate from order `k - 1` on and agree below it.

use serde::{Deserialize, Serialize};

use crate::error::config;
use crate::forward::{BoundaryShape, ForwardSolver};
use crate::geometry::ConformalFactor;
use crate::grid::{BoundaryField, Grid};
use crate::linearization::{divided_differences, EpsilonSchedule};
use crate::Result;

/// Highest Taylor order compared at `x_n = 0`.
pub const MAX_TAYLOR_ORDER: u32 = 5;

/// Tolerance under which two Taylor coefficients count as equal.
const TAYLOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonParams {
    pub probes: Vec<BoundaryShape>,
    /// Highest linearization order probed.
    pub max_order: usize,
    /// Amplitude levels; the last two feed the Richardson step.
    pub eps: Vec<f64>,
    /// A discrepancy is "above the floor" when it exceeds `safety * floor`.
    pub safety: f64,
}

impl Default for ComparisonParams {
    fn default() -> Self {
        ComparisonParams {
            probes: vec![
                BoundaryShape::Constant,
                BoundaryShape::Trig {
                    k: vec![1.0, 0.5],
                    phase: 0.3,
                },
            ],
            max_order: 4,
            eps: vec![0.01, 0.005],
            safety: 10.0,
        }
    }
}

impl ComparisonParams {
    pub fn validate(&self, amplitude_bound: f64) -> Result<()> {
        if self.probes.is_empty() {
            return config("comparison needs at least one probe");
        }
        if !(1..=4).contains(&self.max_order) {
            return config("comparison order must lie in 1..=4");
        }
        if self.eps.len() < 2 {
            return config("comparison needs at least two epsilon levels");
        }
        let worst = self.max_order as f64 * self.eps[0];
        if worst > amplitude_bound {
            return config(format!(
                "largest stencil amplitude {worst:.3e} exceeds the small-data bound {amplitude_bound:.3e}"
            ));
        }
        if !(self.safety >= 1.0) {
            return config("safety factor must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorRow {
    pub order: u32,
    /// `max |d_n^order c1 - d_n^order c2|` over the grid at `x_n = 0`.
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub order: usize,
    /// Sup over probes and boundary samples of the extrapolated difference.
    pub discrepancy: f64,
    /// Richardson error estimates of both sides plus the solver floor.
    pub floor: f64,
    pub above: bool,
    /// Whether the hierarchy predicts a separation at this order.
    pub predicted: bool,
    /// `sup |dd2| / sup |dd1|` of the extrapolated divided differences.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub taylor: Vec<TaylorRow>,
    /// First Taylor order at which the factors differ.
    pub first_taylor_order: Option<u32>,
    pub orders: Vec<OrderRow>,
    /// First linearization order whose discrepancy is above the floor.
    pub first_separated_order: Option<usize>,
    pub max_dn_discrepancy: f64,
    pub max_taylor_discrepancy: f64,
    /// Every order agrees with the prediction.
    pub consistent: bool,
}

/// Checks `c1(x0', 0) = c2(x0', 0)` at some boundary node of `grid`.
pub fn boundary_normalization(c1: &ConformalFactor, c2: &ConformalFactor, grid: &Grid) -> Result<()> {
    let d = grid.dim();
    let found = grid.boundary().iter().any(|&node| {
        let x = grid.coord(node);
        let (a, b) = (c1.normal_taylor(&x[..d], 0)[0].0, c2.normal_taylor(&x[..d], 0)[0].0);
        (a - b).abs() <= TAYLOR_TOL * a.abs().max(1.0)
    });
    if found {
        Ok(())
    } else {
        config("the factors do not agree at any boundary point at x_n = 0")
    }
}

fn taylor_rows(s1: &ForwardSolver, s2: &ForwardSolver) -> Vec<TaylorRow> {
    let grid = s1.grid();
    let d = grid.dim();
    (0..=MAX_TAYLOR_ORDER)
        .map(|order| {
            let discrepancy = (0..grid.len())
                .map(|node| {
                    let x = grid.coord(node);
                    let a = s1.factor().normal_taylor(&x[..d], order)[order as usize].0;
                    let b = s2.factor().normal_taylor(&x[..d], order)[order as usize].0;
                    (a - b).abs()
                })
                .fold(0.0, f64::max);
            TaylorRow { order, discrepancy }
        })
        .collect()
}

/// Extrapolated order-`m` DN divided difference with its error estimate.
fn extrapolated(solver: &ForwardSolver, f: &BoundaryField, m: usize, eps: &[f64]) -> Result<(BoundaryField, f64)> {
    let schedule = EpsilonSchedule {
        levels: eps.to_vec(),
        weights: Vec::new(),
    };
    let dirs = vec![f.clone(); m];
    let dds = divided_differences(solver, &dirs, &schedule)?;
    let k = dds.len();
    let (coarse, fine) = (&dds[k - 2], &dds[k - 1]);
    let q2 = (eps[k - 2] / eps[k - 1]).powi(2);
    let value = fine.dn.zip_with(&coarse.dn, |a, b| (q2 * a - b) / (q2 - 1.0));
    let truncation = fine.dn.zip_with(&coarse.dn, |a, b| a - b).sup_norm() / (q2 - 1.0);
    let residual = dds.iter().map(|dd| dd.max_residual).fold(0.0, f64::max);
    let solver_floor = residual / eps[k - 1].powi(m as i32) / solver.grid().h();
    Ok((value, truncation + solver_floor))
}

/// Compares the DN maps of the two solvers order by order.
pub fn verify_theorem_consistency(
    s1: &ForwardSolver,
    s2: &ForwardSolver,
    params: &ComparisonParams,
) -> Result<ComparisonReport> {
    if s1.grid().as_ref() != s2.grid().as_ref() {
        return config("compared scenarios must share a grid");
    }
    params.validate(s1.config().amplitude_bound.min(s2.config().amplitude_bound))?;
    boundary_normalization(s1.factor(), s2.factor(), s1.grid())?;
    let taylor = taylor_rows(s1, s2);
    let scale = taylor.iter().map(|t| t.discrepancy).fold(0.0, f64::max);
    let first_taylor_order = taylor
        .iter()
        .find(|t| t.discrepancy > TAYLOR_TOL * scale.max(1.0))
        .map(|t| t.order);
    let probes: Vec<BoundaryField> = params
        .probes
        .iter()
        .map(|p| p.normalized(s1.grid()))
        .collect::<Result<_>>()?;

    let mut orders = Vec::new();
    for m in 1..=params.max_order {
        let mut discrepancy = 0.0f64;
        let mut floor = 0.0f64;
        let mut sup1 = 0.0f64;
        let mut sup2 = 0.0f64;
        for f in &probes {
            let (a, ea) = extrapolated(s1, f, m, &params.eps)?;
            let (b, eb) = extrapolated(s2, f, m, &params.eps)?;
            discrepancy = discrepancy.max(a.zip_with(&b, |x, y| x - y).sup_norm());
            floor = floor.max(ea + eb);
            sup1 = sup1.max(a.sup_norm());
            sup2 = sup2.max(b.sup_norm());
        }
        // Factors even in x_n give an odd solution map, so both even-order
        // derivatives vanish identically.
        let odd_only = s1.factor().is_even_in_normal() && s2.factor().is_even_in_normal();
        let predicted = first_taylor_order.is_some_and(|k| m + 1 >= k as usize) && !(odd_only && m % 2 == 0);
        orders.push(OrderRow {
            order: m,
            discrepancy,
            floor,
            above: discrepancy > params.safety * floor,
            predicted,
            ratio: if sup1 > 0.0 { sup2 / sup1 } else { f64::NAN },
        });
    }
    let first_separated_order = orders.iter().find(|o| o.above).map(|o| o.order);
    let consistent = orders.iter().all(|o| o.above == o.predicted);
    Ok(ComparisonReport {
        max_dn_discrepancy: orders.iter().map(|o| o.discrepancy).fold(0.0, f64::max),
        max_taylor_discrepancy: scale,
        taylor,
        first_taylor_order,
        orders,
        first_separated_order,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::NewtonConfig;
    use crate::geometry::ScenarioSpec;
    use crate::grid::{Domain, Grid};
    use std::sync::Arc;

    fn solver(spec: ScenarioSpec, n: usize) -> ForwardSolver {
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), n).unwrap());
        ForwardSolver::new(Arc::new(spec.build().unwrap()), g, NewtonConfig::default()).unwrap()
    }

    #[test]
    fn identical_factors_have_no_discrepancy() {
        let s = solver(ScenarioSpec::new("bump-cubic", 3), 13);
        let p = ComparisonParams {
            max_order: 2,
            ..Default::default()
        };
        let r = verify_theorem_consistency(&s, &s, &p).unwrap();
        assert_eq!(r.first_taylor_order, None);
        assert_eq!(r.max_dn_discrepancy, 0.0);
        assert!(r.consistent);
    }

    #[test]
    fn doubling_alpha_doubles_second_order_response() {
        let s1 = solver(ScenarioSpec::new("bump-cubic", 3), 17);
        let s2 = solver(ScenarioSpec::new("bump-cubic", 3).with_alpha(2.0), 17);
        let p = ComparisonParams {
            max_order: 2,
            ..Default::default()
        };
        let r = verify_theorem_consistency(&s1, &s2, &p).unwrap();
        assert_eq!(r.first_taylor_order, Some(3));
        assert!(!r.orders[0].above && r.orders[1].above, "{r:?}");
        assert!((r.orders[1].ratio - 2.0).abs() < 0.02, "{r:?}");
    }

    #[test]
    fn even_factors_never_separate_at_even_orders() {
        let s1 = solver(ScenarioSpec::new("quartic", 3), 17);
        let mut other = ScenarioSpec::new("quartic", 3);
        other.gamma = Some(2.0);
        let s2 = solver(other, 17);
        let r = verify_theorem_consistency(&s1, &s2, &ComparisonParams::default()).unwrap();
        assert_eq!(r.first_taylor_order, Some(4));
        let predicted: Vec<_> = r.orders.iter().map(|o| o.predicted).collect();
        assert_eq!(predicted, [false, false, true, false]);
        assert!(r.consistent, "{r:?}");
    }

    #[test]
    fn unnormalized_factors_are_rejected() {
        let mut spec = ScenarioSpec::new("flat", 3);
        spec.level = Some(2.0);
        let s1 = solver(ScenarioSpec::new("flat", 3), 9);
        let s2 = solver(spec, 9);
        assert!(verify_theorem_consistency(&s1, &s2, &ComparisonParams::default()).is_err());
    }
}
