//! Stage runners behind the command line. Each reads an
//! [`ExperimentConfig`], runs one group of checks and records tables,
//! fields and pass/fail results into an [`ExperimentRun`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::compare::verify_theorem_consistency;
use super::config::ExperimentConfig;
use super::derivation::derivation_check;
use super::recover::{constants_probe, recover_d3c};
use super::report::{ExperimentRun, StageRecorder, Table};
use crate::cgo::{
    cauchy_on_grid, gaussian_inversion_error, make_zeta_pair, phase_cancellation, remainder_non_increasing,
    remainder_sweep, PlaneSource,
};
use crate::error::config;
use crate::forward::{amplitude_sweep, dn_map, BoundaryShape, ForwardSolver, NewtonConfig};
use crate::geometry::{catalog, ConformalFactor};
use crate::grid::quadrature::l2_norm;
use crate::grid::{BoundaryField, Domain, Grid, ScalarField};
use crate::linearization::{
    adjoint_residual, adjoint_solution, boundary_interior_identity, first_consistency, form_agreement,
    second_consistency, solve_second_lin, verify_higher_order, EpsilonSchedule, LinearizedOperator, SlopeReport,
};
use crate::row;
use crate::Result;

/// Sup error allowed when an affine graph is reproduced in flat space; the
/// discrete operator is exact on affine functions, so only the Newton
/// tolerance remains.
pub const AFFINE_TOL: f64 = 1e-9;

/// Stages in execution order, as accepted by [`run_stage`].
pub const STAGES: [&str; 8] = ["derivation", "euclidean", "forward", "dn", "linearize", "cgo", "recover", "compare"];

fn solver_on(cfg: &ExperimentConfig, c: Arc<ConformalFactor>, grid: Arc<Grid>) -> Result<ForwardSolver> {
    ForwardSolver::new(c, grid, cfg.newton)
}

fn working_solver(cfg: &ExperimentConfig) -> Result<ForwardSolver> {
    solver_on(cfg, cfg.factor()?, cfg.working_grid()?)
}

fn ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Halving ratios of successive errors must sit in the band; a level that is
/// exactly zero is reproduced exactly and counts as passing.
fn band_check(s: &mut StageRecorder, name: &str, errors: &[f64], cfg: &ExperimentConfig) {
    let tol = &cfg.tolerances;
    for (k, w) in errors.windows(2).enumerate() {
        let label = format!("{name}_ratio_{k}");
        if w[1] == 0.0 {
            s.check(&label, true, 0.0, format!("in [{}, {}]", tol.ratio_min, tol.ratio_max), "exact at the finer level");
        } else {
            s.within(&label, w[0] / w[1], tol.ratio_min, tol.ratio_max);
        }
    }
}

/// Enough levels must reach the minimum epsilon slope. When every level
/// already agrees to the Newton tolerance the divided difference is exact
/// (the linearization vanishes by symmetry) and no slope is defined.
fn slope_check(s: &mut StageRecorder, name: &str, r: &SlopeReport, min: f64, cfg: &ExperimentConfig) {
    let levels = cfg.tolerances.slope_levels;
    let condition = format!(">= {levels} levels with slope >= {min}");
    let worst = r.errors.iter().copied().fold(0.0, f64::max);
    if worst <= cfg.newton.residual_tolerance {
        s.check(name, true, worst, condition, "exact to the Newton tolerance at every level");
    } else {
        s.check(name, r.levels_above >= levels, r.levels_above as f64, condition, format!("{:?}", r.slopes));
    }
}

/// Runs the named stage; unknown names are a configuration error.
pub fn run_stage(run: &mut ExperimentRun, cfg: &ExperimentConfig, name: &str) -> Result<()> {
    match name {
        "derivation" => run.stage(name, |s| derivation(cfg, s)),
        "euclidean" => run.stage(name, |s| euclidean(cfg, s)),
        "forward" => run.stage(name, |s| forward(cfg, s)),
        "dn" => run.stage(name, |s| dn(cfg, s)),
        "linearize" => run.stage(name, |s| linearize(cfg, s)),
        "cgo" => run.stage(name, |s| cgo(cfg, s)),
        "recover" => run.stage(name, |s| recover(cfg, s)),
        "compare" => run.stage(name, |s| compare(cfg, s)),
        other => return config(format!("unknown stage `{other}`; expected one of {STAGES:?}")),
    }
    Ok(())
}

/// Residual-form identity on every catalog scenario in both dimensions.
pub fn derivation(cfg: &ExperimentConfig, s: &mut StageRecorder) -> Result<()> {
    let tol = &cfg.tolerances;
    let specs: Vec<_> = [3, 4].into_iter().flat_map(catalog).collect();
    let rows = derivation_check(&specs, tol.derivation_samples, cfg.grid.half_width, cfg.seed)?;
    let mut t = Table::new(&["scenario", "dim", "sets", "points", "max_relative"]);
    for r in &rows {
        t.push(row![r.scenario.as_str(), r.dim, r.sets, r.points, r.max_relative]);
        s.at_most(&format!("{}_n{}", r.scenario, r.dim), r.max_relative, tol.derivation);
    }
    s.table("identity", t);
    Ok(())
}

/// `log(cos x1 / cos x2)`, minimal in flat space.
fn scherk(x: &[f64]) -> f64 {
    (x[0].cos() / x[1].cos()).ln()
}

/// Affine graphs and the Scherk surface in flat space, with the data gate
/// lifted since these are not small.
pub fn euclidean(cfg: &ExperimentConfig, s: &mut StageRecorder) -> Result<()> {
    let nodes = &cfg.forward.euclidean_nodes;
    if nodes.is_empty() {
        s.summary("skipped", "forward.euclidean_nodes is empty");
        return Ok(());
    }
    if cfg.base_dim() != 2 {
        return config("the Scherk study runs in ambient dimension 3");
    }
    if !(cfg.grid.half_width < 0.5 * PI) {
        return config("the Scherk surface needs half_width < pi/2");
    }
    let flat = Arc::new(ConformalFactor::constant(3, 1.0)?);
    let newton = NewtonConfig {
        amplitude_bound: f64::MAX,
        ..cfg.newton
    };
    let solve = |n: usize, f: &dyn Fn(&[f64]) -> f64| -> Result<(f64, usize)> {
        let grid = cfg.grid_with(n)?;
        let solver = ForwardSolver::new(flat.clone(), grid.clone(), newton)?;
        let r = solver.solve(&BoundaryField::from_fn(grid.clone(), f))?;
        let exact = ScalarField::from_fn(grid, f);
        Ok((r.u.zip_with(&exact, |a, b| a - b).sup_norm(), r.iterations))
    };
    let (affine, _) = solve(nodes[0], &|x| 0.3 * x[0] - 0.2 * x[1] + 0.1)?;
    s.at_most("affine", affine, AFFINE_TOL);
    let mut t = Table::new(&["nodes", "h", "sup_error", "iterations"]);
    let mut errors = Vec::new();
    for &n in nodes {
        let (e, its) = solve(n, &scherk)?;
        t.push(row![n, 2.0 * cfg.grid.half_width / (n - 1) as f64, e, its]);
        errors.push(e);
    }
    s.table("scherk", t);
    band_check(s, "scherk", &errors, cfg);
    Ok(())
}

/// Newton behaviour and the amplitude sweep.
pub fn forward(cfg: &ExperimentConfig, s: &mut StageRecorder) -> Result<()> {
    let tol = &cfg.tolerances;
    let solver = working_solver(cfg)?;
    let shape = cfg.forward.shape.normalized(solver.grid())?;
    let mut t = Table::new(&["amplitude", "iterations", "stages", "final_residual", "tail_constant"]);
    let mut h = Table::new(&["amplitude", "step", "residual"]);
    let mut last = None;
    for &a in &cfg.forward.amplitudes {
        let r = solver.solve(&shape.scale(a))?;
        t.push(row![a, r.iterations, r.stages, r.final_residual(), r.quadratic_tail_constant()]);
        for (k, v) in r.residual_history.iter().enumerate() {
            h.push(row![a, k, *v]);
        }
        let label = format!("newton_{a}");
        s.at_most(&format!("{label}_iterations"), r.iterations as f64, tol.newton_iterations as f64);
        let quad = r.has_quadratic_tail(tol.quadratic_tail);
        s.check(
            &format!("{label}_quadratic_tail"),
            quad,
            r.quadratic_tail_constant().unwrap_or(0.0),
            format!("r_(k+1) <= {:e} r_k^2", tol.quadratic_tail),
            "",
        );
        last = Some(r.u);
    }
    s.table("newton", t);
    s.table("residual_history", h);
    if let Some(u) = last {
        s.field("solution", u);
    }

    let sweep = amplitude_sweep(&solver, &shape, &cfg.forward.amplitudes)?;
    let mut t = Table::new(&["amplitude", "sup_u", "ratio", "iterations", "converged"]);
    for r in &sweep.rows {
        t.push(row![r.amplitude, r.sup_norm, r.ratio, r.iterations, r.converged]);
    }
    s.table("sweep", t);
    let constant = sweep.bound_constant(shape.sup_norm());
    s.summary("bound_constant", constant);
    let all = sweep.rows.iter().all(|r| r.converged);
    s.check("sweep_bounded", all && constant.is_finite(), constant, "every amplitude converges", "");
    Ok(())
}

/// One DN record at the largest sweep amplitude.
pub fn dn(cfg: &ExperimentConfig, s: &mut StageRecorder) -> Result<()> {
    let solver = working_solver(cfg)?;
    let amp = cfg.forward.amplitudes.last().copied().unwrap_or(cfg.newton.amplitude_bound);
    let f = cfg.forward.shape.normalized(solver.grid())?.scale(amp);
    let (rec, result) = dn_map(&solver, &f)?;
    let grid = solver.grid();
    let d = grid.dim();
    let mut cols = vec!["sample".to_string()];
    cols.extend((0..d).map(|a| format!("x{a}")));
    cols.extend(["f".to_string(), "response".to_string()]);
    let mut t = Table {
        columns: cols,
        rows: Vec::new(),
    };
    for (k, smp) in grid.samples().iter().enumerate() {
        let x = grid.coord(smp.node);
        let mut r = row![k];
        r.extend(x[..d].iter().map(|&v| v.into()));
        r.extend(row![rec.f.values()[k], rec.response.values()[k]]);
        t.push(r);
    }
    s.table("record", t);
    s.summary("amplitude", rec.amplitude);
    s.summary("iterations", rec.iterations);
    s.at_most("final_residual", rec.final_residual, cfg.newton.residual_tolerance);
    s.field("solution", result.u);
    Ok(())
}

/// Divided differences, conductivity form, adjoint weight, the
/// boundary/interior identity and the higher-order identity.
pub fn linearize(cfg: &ExperimentConfig, s: &mut StageRecorder) -> Result<()> {
    let tol = &cfg.tolerances;
    let lin = &cfg.linearization;
    let c = cfg.factor()?;
    let solver = working_solver(cfg)?;
    let grid = solver.grid().clone();
    let f = cfg.forward.shape.normalized(&grid)?;
    let one = BoundaryShape::Constant.normalized(&grid)?;

    let slope_table = |r: &SlopeReport| {
        let mut t = Table::new(&["eps", "error", "slope"]);
        for (k, (e, err)) in r.eps.iter().zip(&r.errors).enumerate() {
            t.push(row![*e, *err, r.slopes.get(k).copied()]);
        }
        t
    };
    let first = first_consistency(&solver, &f, &EpsilonSchedule::dyadic(lin.first_eps, lin.levels), tol.first_slope)?;
    s.table("first_slopes", slope_table(&first));
    slope_check(s, "first_slope_levels", &first, tol.first_slope, cfg);
    let second = second_consistency(
        &solver,
        &one,
        &f,
        &EpsilonSchedule::dyadic(lin.second_eps, lin.levels),
        tol.second_slope,
    )?;
    s.table("second_slopes", slope_table(&second));
    slope_check(s, "second_slope_levels", &second, tol.second_slope, cfg);

    let nodes = &cfg.grid.refinements;
    if c.dim() == 3 && nodes.len() >= 2 {
        let shape = cfg.forward.shape.clone();
        let forms = form_agreement(&c, &cfg.domain()?, &|x| shape.eval(x), nodes)?;
        let mut t = Table::new(&["nodes", "difference"]);
        for (n, e) in forms.nodes.iter().zip(&forms.errors) {
            t.push(row![*n, *e]);
        }
        s.table("forms", t);
        band_check(s, "forms", &forms.errors, cfg);
    }

    let oscillatory = BoundaryShape::Trig {
        k: (0..grid.dim()).map(|a| if a % 2 == 0 { 2.0 } else { -1.0 }).collect(),
        phase: 0.4,
    };
    let mut t = Table::new(&["nodes", "adjoint_residual", "identity_constant", "identity_oscillatory"]);
    let (mut adj, mut id_c, mut id_o) = (Vec::new(), Vec::new(), Vec::new());
    for &n in nodes {
        let op = LinearizedOperator::new(c.clone(), cfg.grid_with(n)?)?;
        let g = op.grid().clone();
        adj.push(adjoint_residual(&op, &adjoint_solution(&op)));
        let identity = |a: &BoundaryShape, b: &BoundaryShape| -> Result<f64> {
            let va = op.solve_first(&a.sample(&g)?)?;
            let vb = op.solve_first(&b.sample(&g)?)?;
            let w = solve_second_lin(&op, &va, &vb)?;
            Ok(boundary_interior_identity(&op, &va, &vb, &w)?.residual)
        };
        id_c.push(identity(&BoundaryShape::Constant, &BoundaryShape::Constant)?);
        id_o.push(identity(&cfg.forward.shape, &oscillatory)?);
        t.push(row![n, adj[adj.len() - 1], id_c[id_c.len() - 1], id_o[id_o.len() - 1]]);
    }
    s.table("refinement", t);
    band_check(s, "adjoint", &adj, cfg);
    for (name, res) in [("identity_constant", &id_c), ("identity_oscillatory", &id_o)] {
        for (k, r) in ratios(res).iter().enumerate() {
            // Identity residuals vanish at least as fast as h^2.
            let ok = *r >= tol.ratio_min || res[k + 1] == 0.0;
            s.check(&format!("{name}_ratio_{k}"), ok, *r, format!(">= {}", tol.ratio_min), "");
        }
    }

    if lin.higher_order >= 2 {
        let dirs = vec![one.clone(); lin.higher_order];
        let r = verify_higher_order(&solver, &dirs, lin.higher_eps)?;
        s.summary("higher_recovered_top", r.recovered_top);
        s.summary("higher_exact_top", r.exact_top);
        s.summary("higher_budget", r.budget);
        s.summary("higher_identity_residual", r.identity_residual);
        s.check(
            "higher_order_top",
            r.within_budget(),
            (r.recovered_top - r.exact_top).abs(),
            format!("<= budget {:e}", r.budget),
            format!("order {}, eps {}, h {}", r.order, r.eps, r.h),
        );
    }
    Ok(())
}

/// Random frequencies and parameters with `h |xi| < 2`.
fn zeta_samples(d: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let xi: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let len = xi.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
            let h = rng.gen_range(0.01..1.99) / len;
            (xi, h)
        })
        .collect()
}

/// Frequency-pair algebra, the Cauchy transform, the remainder sweep and
/// the phase symmetry.
pub fn cgo(cfg: &ExperimentConfig, s: &mut StageRecorder) -> Result<()> {
    let tol = &cfg.tolerances;
    let d = cfg.base_dim();
    let mut worst = 0.0f64;
    for (xi, h) in zeta_samples(d, tol.zeta_samples, cfg.seed) {
        worst = worst.max(make_zeta_pair(&xi, h, None)?.defect());
    }
    s.at_most("zeta_algebra", worst, tol.zeta);

    let pair = make_zeta_pair(&cfg.cgo.xi, cfg.cgo.h_sweep[0], None)?;
    let zeta0 = pair.phases().0.zeta0;
    let params = &cfg.recovery.cauchy;
    let mut t = Table::new(&["nodes", "relative_l2"]);
    let mut errs = Vec::new();
    for &n in &cfg.grid.refinements {
        let e = gaussian_inversion_error(&cfg.grid_with(n)?, &zeta0, params)?;
        t.push(row![n, e]);
        errs.push(e);
    }
    s.table("cauchy", t);
    if let Some(&e) = errs.last() {
        s.at_most("cauchy_inversion", e, tol.cauchy);
    }
    let improving = errs.windows(2).all(|w| w[1] < w[0]);
    s.check("cauchy_improves", improving, f64::NAN, "error decreases under refinement", format!("{errs:?}"));

    let small = cfg.grid_with(cfg.grid.refinements.first().copied().unwrap_or(17))?;
    let bump = |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new(if r2 < 0.36 { (1.0 - r2 / 0.36).powi(4) } else { 0.0 }, 0.3 * x[0])
    };
    let src = PlaneSource {
        support: Domain::cube(d, 0.6)?,
        f: &bump,
    };
    let neg: Vec<Complex64> = zeta0.iter().map(|z| -z).collect();
    let (p, _) = cauchy_on_grid(&src, &zeta0, &small, params)?;
    let (q, _) = cauchy_on_grid(&src, &neg, &small, params)?;
    let odd = p.zip_with(&q, |a, b| a + b).sup_norm();
    s.check("cauchy_antisymmetry", odd == 0.0, odd, "== 0 exactly", "");

    let op = LinearizedOperator::new(cfg.factor()?, cfg.working_grid()?)?;
    let rows = remainder_sweep(&op, &cfg.cgo.xi, &cfg.cgo.h_sweep, params)?;
    let mut t = Table::new(&["h", "remainder_norm", "relative_remainder", "phase_norm", "solve_residual"]);
    for r in &rows {
        t.push(row![r.h, r.remainder_norm, r.relative_remainder, r.phase_norm, r.solve_residual]);
    }
    s.table("remainder", t);
    let norms: Vec<f64> = rows.iter().map(|r| r.remainder_norm).collect();
    s.check(
        "remainder_non_increasing",
        remainder_non_increasing(&rows, tol.remainder_slack),
        norms.last().copied().unwrap_or(f64::NAN),
        format!("non-increasing in h, slack {} at the coarsest step", tol.remainder_slack),
        format!("{norms:?}"),
    );

    let pc = phase_cancellation(&op, &zeta0, params)?;
    s.summary("phase_max", pc.max_phase);
    s.summary("phase_max_difference", pc.max_difference);
    let scale = pc.max_phase.max(f64::MIN_POSITIVE);
    s.at_most("phase_cancellation", pc.max_sum / scale, tol.phase);
    s.at_most("phase_transform_antisymmetry", pc.transform_antisymmetry / scale, tol.phase);
    Ok(())
}

/// Recovery of the third normal derivative, the constants probe and the
/// amplitude-scaling law.
pub fn recover(cfg: &ExperimentConfig, s: &mut StageRecorder) -> Result<()> {
    let tol = &cfg.tolerances;
    let solver = working_solver(cfg)?;
    let r = recover_d3c(&solver, &cfg.recovery)?;
    let d = solver.grid().dim();

    let mut cols: Vec<String> = (0..d).map(|a| format!("xi{a}")).collect();
    for c in [
        "value_re", "value_im", "exact_re", "exact_im", "model_re", "model_im", "remainder1", "remainder2",
        "truncation", "floor", "product_defect", "noise", "mirrored",
    ] {
        cols.push(c.into());
    }
    let mut t = Table {
        columns: cols,
        rows: Vec::new(),
    };
    for row in &r.rows {
        let mut cells: Vec<_> = row.xi.iter().map(|&v| v.into()).collect();
        cells.extend(row![
            row.value.re,
            row.value.im,
            row.exact.re,
            row.exact.im,
            row.model.re,
            row.model.im,
            row.remainders[0],
            row.remainders[1],
            row.truncation,
            row.floor,
            row.product_defect,
            row.noise,
            row.mirrored,
        ]);
        t.push(cells);
    }
    s.table("fourier", t);
    let mut ex = Table::new(&["xi", "reason"]);
    for e in &r.excluded {
        ex.push(row![format!("{:?}", e.xi), e.reason.as_str()]);
    }
    s.table("exclusions", ex);
    let mut sv = Table::new(&["index", "singular_value"]);
    for (k, v) in r.tikhonov.singular_values.iter().enumerate() {
        sv.push(row![k, *v]);
    }
    s.table("singular_values", sv);
    s.summary("lambda", r.tikhonov.lambda);
    s.summary("condition_number", r.tikhonov.condition_number);
    s.summary("target_unreachable", r.tikhonov.target_unreachable);
    s.summary("modes", r.modes.len());
    s.summary("solves", r.solves);
    s.summary("excluded", r.excluded.len());
    s.summary("data_floor", r.errors.data_floor);
    s.summary("error_truncated", r.errors.truncated);
    s.summary("error_full", r.errors.full);
    s.field("recovered", r.field.clone());
    s.field("truth", r.truth.clone());
    s.field("truncated_truth", r.truncated_truth.clone());

    match (r.errors.fourier_data, r.errors.fourier_model, r.errors.full, r.errors.truncated) {
        (Some(fd), Some(fm), Some(full), Some(trunc)) => {
            s.at_most("fourier_data", fd, tol.fourier);
            s.at_most("fourier_model", fm, tol.fourier);
            s.at_most("field_l2", full, tol.field);
            // Truncated error against the predicted floor of the data.
            let ratio = trunc / r.errors.data_floor.max(f64::MIN_POSITIVE);
            s.at_most("field_over_floor", ratio, tol.safety);
        }
        _ => {
            // The truth vanishes: the reconstruction itself is the error.
            s.at_most("zero_field", r.errors.recovered_norm, tol.field * tol.scaling);
        }
    }

    let probe = constants_probe(&solver, &cfg.recovery.eps)?;
    s.summary("constants_boundary", probe.boundary);
    s.summary("constants_interior", probe.interior);
    s.check(
        "constants_probe",
        probe.error <= probe.budget,
        probe.error,
        format!("<= budget {:e}", probe.budget),
        "",
    );

    if let Some(alpha) = cfg.scenario.alpha.or(matches!(cfg.scenario.id.as_str(), "bump-cubic" | "exp-cubic" | "graded-cubic").then_some(1.0)) {
        let mut doubled = cfg.scenario.clone();
        doubled.alpha = Some(2.0 * alpha);
        let s2 = solver_on(cfg, Arc::new(doubled.build()?), solver.grid().clone())?;
        let r2 = recover_d3c(&s2, &cfg.recovery)?;
        let twice = r.field.map(|v| 2.0 * v);
        let rel = l2_norm(&r2.field.zip_with(&twice, |a, b| a - b)) / l2_norm(&twice).max(f64::MIN_POSITIVE);
        s.at_most("alpha_scaling", rel, tol.scaling);
    }
    Ok(())
}

/// Contrapositive comparison of two factors.
pub fn compare(cfg: &ExperimentConfig, s: &mut StageRecorder) -> Result<()> {
    let Some(cmp) = &cfg.comparison else {
        s.summary("skipped", "no [comparison] section");
        return Ok(());
    };
    let grid = cfg.working_grid()?;
    let s1 = solver_on(cfg, cfg.factor()?, grid.clone())?;
    let s2 = solver_on(cfg, Arc::new(cmp.other.build()?), grid)?;
    let r = verify_theorem_consistency(&s1, &s2, &cmp.params)?;
    let mut t = Table::new(&["order", "taylor_discrepancy"]);
    for row in &r.taylor {
        t.push(row![row.order as usize, row.discrepancy]);
    }
    s.table("taylor", t);
    let mut t = Table::new(&["order", "discrepancy", "floor", "above", "predicted", "ratio"]);
    for o in &r.orders {
        t.push(row![o.order, o.discrepancy, o.floor, o.above, o.predicted, o.ratio]);
    }
    s.table("orders", t);
    s.summary("first_taylor_order", r.first_taylor_order.map(|k| k as f64));
    s.summary("first_separated_order", r.first_separated_order.map(|k| k as f64));
    s.summary("max_dn_discrepancy", r.max_dn_discrepancy);
    s.summary("max_taylor_discrepancy", r.max_taylor_discrepancy);
    for o in &r.orders {
        s.check(
            &format!("order_{}", o.order),
            o.above == o.predicted,
            o.discrepancy / o.floor.max(f64::MIN_POSITIVE),
            if o.predicted {
                format!("above {} x floor", cmp.params.safety)
            } else {
                format!("below {} x floor", cmp.params.safety)
            },
            "",
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScenarioSpec;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.grid.nodes = 17;
        cfg.grid.refinements = vec![17, 33];
        cfg
    }

    #[test]
    fn unknown_stage_is_rejected() {
        let mut run = ExperimentRun::new(None);
        assert!(run_stage(&mut run, &small(), "nope").is_err());
    }

    #[test]
    fn derivation_stage_passes() {
        let mut run = ExperimentRun::new(None);
        let mut cfg = small();
        cfg.tolerances.derivation_samples = 2;
        run_stage(&mut run, &cfg, "derivation").unwrap();
        assert!(run.summary().passed, "{:?}", run.summary().failures);
        assert_eq!(run.stages[0].checks.len(), 10);
    }

    #[test]
    fn forward_and_dn_stages_pass_on_a_small_grid() {
        let mut run = ExperimentRun::new(None);
        let cfg = small();
        run_stage(&mut run, &cfg, "forward").unwrap();
        run_stage(&mut run, &cfg, "dn").unwrap();
        let sum = run.summary();
        assert!(sum.passed, "{:?}", sum.failures);
        assert!(run.tables.contains_key("forward.sweep"));
        assert!(run.fields.contains_key("dn.solution"));
    }

    #[test]
    fn stage_errors_become_failures() {
        let mut cfg = small();
        cfg.scenario = ScenarioSpec::new("mystery", 3);
        let mut run = ExperimentRun::new(None);
        run_stage(&mut run, &cfg, "forward").unwrap();
        assert_eq!(run.summary().failures[0].check, "forward.error");
    }

    #[test]
    fn zeta_samples_respect_the_constraint() {
        for (xi, h) in zeta_samples(3, 200, 1) {
            let len = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(h * len < 2.0 && h > 0.0);
        }
    }
}
