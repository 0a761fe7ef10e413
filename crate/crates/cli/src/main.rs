use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use minsurf_core::forward::BoundaryShape;
use minsurf_core::geometry::ScenarioSpec;
use minsurf_core::pipeline::{
    render_text, run_stage, ComparisonConfig, ExperimentConfig, ExperimentRun, RunSummary, CONFIG_REFERENCE,
};

/// Forward and inverse experiments for the minimal surface equation on
/// conformally Euclidean manifolds.
///
/// Every run subcommand writes run.json, timings.json, tables/*.csv and
/// fields/*.csv to the output directory, prints one PASS/FAIL line per
/// check and exits non-zero if any check failed.
#[derive(Parser, Debug)]
#[command(name = "minsurf", version, after_long_help = CONFIG_REFERENCE)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment file; keys not given keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the file.
    #[arg(long, global = true, env = "MINSURF_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Scenario id, replacing the file's scenario (ambient dimension kept
    /// unless --dim is given).
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Ambient dimension n.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Scenario parameter as key=value; repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Nodes per axis of the working grid.
    #[arg(long, global = true, visible_alias = "grid")]
    nodes: Option<usize>,
    /// Node counts of the refinement studies, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    refinements: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Boundary data shape: `const`, `affine:a1,a2`, `harmonic:3`,
    /// `trig:k1,k2;phase` or `gauss:c1,c2;width`.
    #[arg(long, allow_hyphen_values = true)]
    f_spec: Option<BoundaryShape>,
    /// Surrogate norm of the data; replaces the amplitude sweep.
    #[arg(long)]
    amplitude: Option<f64>,
}

impl DataArgs {
    fn apply(self, cfg: &mut ExperimentConfig) {
        if let Some(shape) = self.f_spec {
            cfg.forward.shape = shape;
        }
        if let Some(a) = self.amplitude {
            cfg.forward.amplitudes = vec![a];
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the level-set residual identity on the scenario catalog.
    VerifyDerivation,
    /// Newton convergence, the amplitude sweep and the flat-space study.
    Forward {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Record one Dirichlet-to-Neumann sample.
    Dn {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Linearization checks: slopes, forms, adjoint weight and identities.
    Linearize {
        /// Order of the higher-order identity; 0 skips it.
        #[arg(long)]
        order: Option<usize>,
        /// Number of dyadic amplitude levels.
        #[arg(long)]
        eps_levels: Option<usize>,
        /// Test direction shape, same forms as `forward --f-spec`.
        #[arg(long, alias = "f-spec", allow_hyphen_values = true)]
        test_fns: Option<BoundaryShape>,
    },
    /// Frequency pairs, the Cauchy transform and CGO remainders.
    CgoCheck {
        /// Frequency, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Option<Vec<f64>>,
        /// Descending semiclassical parameters, comma separated.
        #[arg(long, value_delimiter = ',')]
        h_sweep: Option<Vec<f64>>,
    },
    /// Recover the third normal derivative of the factor.
    Recover,
    /// Compare DN data of two factors against their Taylor discrepancy.
    Compare {
        /// Scenario id of the second factor.
        #[arg(long)]
        other: Option<String>,
        /// Parameter of the second factor as key=value; repeatable.
        #[arg(long = "other-param", value_name = "KEY=VALUE")]
        other_params: Vec<String>,
    },
    /// Run every stage in order.
    All,
    /// Print the checks stored in an earlier run.
    Report {
        /// Directory holding run.json; defaults to the output directory.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if common.scenario.is_some() || common.dim.is_some() {
        let id = common.scenario.clone().unwrap_or_else(|| cfg.scenario.id.clone());
        let dim = common.dim.unwrap_or(cfg.scenario.dim);
        cfg.set_scenario(ScenarioSpec::new(&id, dim));
    }
    for p in &common.params {
        cfg.scenario.set_param(p)?;
    }
    if let Some(n) = common.nodes {
        cfg.grid.nodes = n;
    }
    if let Some(r) = &common.refinements {
        cfg.grid.refinements = r.clone();
    }
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn execute(cfg: ExperimentConfig, stages: &[&str]) -> Result<ExitCode> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    let mut run = ExperimentRun::new(Some(cfg.clone()));
    for s in stages {
        log::info!("stage {s}");
        run_stage(&mut run, &cfg, s)?;
    }
    let summary = run.write(&dir).with_context(|| format!("writing {}", dir.display()))?;
    print!("{}", render_text(&summary));
    println!("outputs in {}", dir.display());
    Ok(exit(&summary))
}

fn exit(summary: &RunSummary) -> ExitCode {
    ExitCode::from(summary.exit_code().clamp(0, 255) as u8)
}

fn report(dir: &Path) -> Result<ExitCode> {
    let path = dir.join("run.json");
    let summary = RunSummary::load(&path).with_context(|| format!("reading {}", path.display()))?;
    print!("{}", render_text(&summary));
    Ok(exit(&summary))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::VerifyDerivation => execute(cfg, &["derivation"]),
        Command::Forward { data } => {
            data.apply(&mut cfg);
            execute(cfg, &["euclidean", "forward"])
        }
        Command::Dn { data } => {
            data.apply(&mut cfg);
            execute(cfg, &["dn"])
        }
        Command::Linearize {
            order,
            eps_levels,
            test_fns,
        } => {
            if let Some(m) = order {
                cfg.linearization.higher_order = m;
            }
            if let Some(l) = eps_levels {
                cfg.linearization.levels = l;
            }
            if let Some(shape) = test_fns {
                cfg.forward.shape = shape;
            }
            execute(cfg, &["linearize"])
        }
        Command::CgoCheck { xi, h_sweep } => {
            if let Some(xi) = xi {
                cfg.cgo.xi = xi;
            }
            if let Some(h) = h_sweep {
                cfg.cgo.h_sweep = h;
            }
            execute(cfg, &["cgo"])
        }
        Command::Recover => execute(cfg, &["recover"]),
        Command::Compare { other, other_params } => {
            if let Some(id) = other {
                let params = cfg.comparison.take().map(|c| c.params).unwrap_or_default();
                cfg.comparison = Some(ComparisonConfig {
                    other: ScenarioSpec::new(&id, cfg.scenario.dim),
                    params,
                });
                let spec = cfg.scenario.clone();
                cfg.set_scenario(spec);
            }
            let Some(cmp) = cfg.comparison.as_mut() else {
                bail!("compare needs --other or a [comparison] section in the config");
            };
            for p in &other_params {
                cmp.other.set_param(p)?;
            }
            execute(cfg, &["compare"])
        }
        Command::All => execute(cfg, &minsurf_core::pipeline::STAGES),
        Command::Report { dir } => report(&dir.unwrap_or(cfg.output_dir)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
