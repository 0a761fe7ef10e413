//! Dirichlet-to-Neumann records and amplitude sweeps.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newton::{ForwardSolver, SolveResult};
use crate::error::{config, Error};
use crate::grid::io::write_boundary_csv;
use crate::grid::{normal_derivative, BoundaryField, GridMeta};
use crate::Result;

/// Boundary data paired with the normal derivative of its solution.
#[derive(Debug, Clone)]
pub struct DnRecord {
    pub scenario: String,
    pub amplitude: f64,
    pub f: BoundaryField,
    pub response: BoundaryField,
    pub iterations: usize,
    pub final_residual: f64,
}

/// JSON side of a persisted record; the values live in the CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnMeta {
    pub scenario: String,
    pub amplitude: f64,
    pub grid: GridMeta,
    pub iterations: usize,
    pub final_residual: f64,
    pub samples: usize,
    pub values_file: String,
}

impl DnRecord {
    pub fn meta(&self, values_file: &str) -> DnMeta {
        DnMeta {
            scenario: self.scenario.clone(),
            amplitude: self.amplitude,
            grid: self.f.grid().meta(),
            iterations: self.iterations,
            final_residual: self.final_residual,
            samples: self.f.values().len(),
            values_file: values_file.to_string(),
        }
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        let csv = format!("{stem}.csv");
        write_boundary_csv(&dir.join(&csv), &[("f", &self.f), ("response", &self.response)])?;
        let json = serde_json::to_string_pretty(&self.meta(&csv))?;
        std::fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
        Ok(())
    }
}

/// Solves with data `f` and records `d_nu u_f` on the boundary.
pub fn dn_map(solver: &ForwardSolver, f: &BoundaryField) -> Result<(DnRecord, SolveResult)> {
    let result = solver.solve(f)?;
    let response = normal_derivative(&result.u);
    if response.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite normal derivative".into()));
    }
    let record = DnRecord {
        scenario: solver.factor().label().to_string(),
        amplitude: super::boundary::surrogate_norm(f),
        f: f.clone(),
        response,
        iterations: result.iterations,
        final_residual: result.final_residual(),
    };
    Ok((record, result))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub amplitude: f64,
    pub sup_norm: f64,
    /// `sup |u| / amplitude`; absent for the zero amplitude.
    pub ratio: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Smallest amplitude whose solve failed, the empirical edge of the
    /// contraction regime.
    pub first_failure: Option<f64>,
}

impl SweepTable {
    /// Largest `sup |u| / sup |f|` over converged rows.
    pub fn bound_constant(&self, shape_sup: f64) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.ratio)
            .fold(0.0, f64::max)
            / shape_sup
    }
}

/// Solves for `eps * shape` at every amplitude. `shape` should have unit
/// surrogate norm so that amplitudes are directly comparable with the
/// small-data bound.
pub fn amplitude_sweep(solver: &ForwardSolver, shape: &BoundaryField, amplitudes: &[f64]) -> Result<SweepTable> {
    if amplitudes.windows(2).any(|w| !(w[0] < w[1])) {
        return config("amplitudes must be strictly ascending");
    }
    if amplitudes.first().is_some_and(|&a| a < 0.0) {
        return config("amplitudes must be non-negative");
    }
    let rows: Vec<SweepRow> = amplitudes
        .par_iter()
        .map(|&eps| match solver.solve(&shape.scale(eps)) {
            Ok(r) => {
                let sup_norm = r.u.sup_norm();
                SweepRow {
                    amplitude: eps,
                    sup_norm,
                    ratio: (eps > 0.0).then(|| sup_norm / eps),
                    iterations: r.iterations,
                    converged: true,
                }
            }
            Err(e) => {
                log::info!("amplitude {eps:e} failed: {e}");
                SweepRow {
                    amplitude: eps,
                    sup_norm: f64::NAN,
                    ratio: None,
                    iterations: 0,
                    converged: false,
                }
            }
        })
        .collect();
    let first_failure = rows.iter().find(|r| !r.converged).map(|r| r.amplitude);
    Ok(SweepTable { rows, first_failure })
}
