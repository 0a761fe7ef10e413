//! Central mixed divided differences of the solution and DN maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error};
use crate::forward::{surrogate_norm, ForwardSolver};
use crate::grid::{normal_derivative, BoundaryField, ScalarField};
use crate::Result;

/// Amplitude levels for the divided differences, finest last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub levels: Vec<f64>,
    /// Base amplitude per direction; empty means 1 for every direction.
    #[serde(default)]
    pub weights: Vec<f64>,
}

impl EpsilonSchedule {
    /// `start, start/2, ...` with `count` levels.
    pub fn dyadic(start: f64, count: usize) -> Self {
        EpsilonSchedule {
            levels: (0..count).map(|k| start / f64::powi(2.0, k as i32)).collect(),
            weights: Vec::new(),
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.get(i).copied().unwrap_or(1.0)
    }

    /// Every stencil point must stay inside the small-data bound.
    pub fn validate(&self, directions: &[BoundaryField], bound: f64) -> Result<()> {
        if self.levels.is_empty() {
            return config("epsilon schedule is empty");
        }
        if self.levels.iter().any(|&e| !(e > 0.0)) {
            return config("epsilon levels must be positive");
        }
        if self.levels.windows(2).any(|w| !(w[1] < w[0])) {
            return config("epsilon levels must be strictly decreasing");
        }
        if !self.weights.is_empty() && self.weights.len() != directions.len() {
            return config(format!(
                "{} weights for {} directions",
                self.weights.len(),
                directions.len()
            ));
        }
        let reach: f64 = directions
            .iter()
            .enumerate()
            .map(|(i, f)| self.weight(i).abs() * surrogate_norm(f))
            .sum();
        let worst = self.levels[0] * reach;
        if worst > bound * (1.0 + 1e-12) {
            return config(format!(
                "largest stencil amplitude {worst:.3e} exceeds the small-data bound {bound:.3e}"
            ));
        }
        Ok(())
    }
}

/// Order-`m` central divided difference at one level.
#[derive(Debug, Clone)]
pub struct DividedDifference {
    pub eps: f64,
    pub order: usize,
    /// Interior field, approximating the mixed derivative of `u`.
    pub u: ScalarField,
    /// Same stencil applied to the DN responses.
    pub dn: BoundaryField,
    pub solves: usize,
    pub max_iterations: usize,
    /// Largest final Newton residual among the stencil solves.
    pub max_residual: f64,
}

/// `sum_s (prod s_i) u(eps sum s_i f_i) / (2 eps)^m` over `s in {-1, 1}^m`.
/// The `2^m` forward solves run in parallel.
pub fn divided_difference(solver: &ForwardSolver, directions: &[BoundaryField], eps: f64) -> Result<DividedDifference> {
    let m = directions.len();
    if m == 0 {
        return config("divided difference needs at least one direction");
    }
    let grid = solver.grid();
    let signs: Vec<Vec<i8>> = (0..1usize << m)
        .map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
        .collect();
    let solves: Vec<(ScalarField, BoundaryField, usize, f64)> = signs
        .par_iter()
        .map(|s| {
            let mut f = BoundaryField::zeros(grid.clone());
            for (dir, &si) in directions.iter().zip(s) {
                f = f.zip_with(dir, |a, b| a + si as f64 * eps * b);
            }
            let r = solver.solve(&f).map_err(|e| Error::DividedDifference {
                eps,
                signs: s.clone(),
                source: Box::new(e),
            })?;
            let dn = normal_derivative(&r.u);
            let res = r.final_residual();
            Ok((r.u, dn, r.iterations, res))
        })
        .collect::<Result<_>>()?;
    let scale = (2.0 * eps).powi(m as i32).recip();
    let mut u = vec![0.0; grid.len()];
    let mut dn = vec![0.0; grid.samples().len()];
    let mut max_iterations = 0;
    let mut max_residual = 0.0f64;
    for (s, (field, response, its, res)) in signs.iter().zip(&solves) {
        max_residual = max_residual.max(*res);
        let sign = s.iter().map(|&v| v as f64).product::<f64>() * scale;
        for (acc, v) in u.iter_mut().zip(field.values()) {
            *acc += sign * v;
        }
        for (acc, v) in dn.iter_mut().zip(response.values()) {
            *acc += sign * v;
        }
        max_iterations = max_iterations.max(*its);
    }
    Ok(DividedDifference {
        eps,
        order: m,
        u: ScalarField::new(grid.clone(), u)?,
        dn: BoundaryField::new(grid.clone(), dn)?,
        solves: solves.len(),
        max_iterations,
        max_residual,
    })
}

/// Divided differences at every level of a schedule.
pub fn divided_differences(
    solver: &ForwardSolver,
    directions: &[BoundaryField],
    schedule: &EpsilonSchedule,
) -> Result<Vec<DividedDifference>> {
    schedule.validate(directions, solver.config().amplitude_bound)?;
    let weighted: Vec<BoundaryField> = directions
        .iter()
        .enumerate()
        .map(|(i, f)| f.scale(schedule.weight(i)))
        .collect();
    let norm: f64 = (0..directions.len()).map(|i| schedule.weight(i)).product();
    schedule
        .levels
        .iter()
        .map(|&eps| {
            let mut dd = divided_difference(solver, &weighted, eps)?;
            if norm != 1.0 {
                dd.u = dd.u.map(|v| v / norm);
                dd.dn = dd.dn.scale(1.0 / norm);
            }
            Ok(dd)
        })
        .collect()
}

/// Observed orders `log2(e_k / e_{k+1}) / log2(eps_k / eps_{k+1})`.
pub fn observed_slopes(eps: &[f64], err: &[f64]) -> Vec<f64> {
    eps.windows(2)
        .zip(err.windows(2))
        .map(|(e, r)| (r[0] / r[1]).ln() / (e[0] / e[1]).ln())
        .collect()
}

/// Longest run of consecutive slopes at or above `min`, counted in levels.
pub fn levels_above(slopes: &[f64], min: f64) -> usize {
    let mut best = 0;
    let mut run = 0;
    for &s in slopes {
        run = if s >= min { run + 1 } else { 0 };
        best = best.max(run);
    }
    if best > 0 {
        best + 1
    } else {
        0
    }
}
