//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::compare::{boundary_normalization, ComparisonParams};
use super::recover::RecoveryParams;
use crate::error::config;
use crate::forward::{BoundaryShape, NewtonConfig};
use crate::geometry::{ConformalFactor, ScenarioSpec};
use crate::grid::{Domain, Grid};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// The base domain is `[-half_width, half_width]^(n-1)`.
    pub half_width: f64,
    /// Nodes per axis of the working grid.
    pub nodes: usize,
    /// Node counts of the refinement studies, each roughly doubling.
    pub refinements: Vec<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_width: 1.0,
            nodes: 65,
            refinements: vec![33, 65],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardConfig {
    pub shape: BoundaryShape,
    /// Surrogate norms of the sweep, ascending.
    pub amplitudes: Vec<f64>,
    /// Grids of the Scherk-surface convergence study; empty skips it.
    pub euclidean_nodes: Vec<usize>,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        ForwardConfig {
            shape: BoundaryShape::Trig {
                k: vec![1.0, 0.5],
                phase: 0.3,
            },
            amplitudes: vec![0.0125, 0.025, 0.0375, 0.05],
            euclidean_nodes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizationConfig {
    /// Largest level of the dyadic first-order schedule.
    pub first_eps: f64,
    /// Largest level of the dyadic second-order schedule.
    pub second_eps: f64,
    pub levels: usize,
    /// Order of the higher-order identity; 0 skips it.
    pub higher_order: usize,
    pub higher_eps: f64,
}

impl Default for LinearizationConfig {
    fn default() -> Self {
        LinearizationConfig {
            first_eps: 0.04,
            second_eps: 0.02,
            levels: 4,
            higher_order: 3,
            higher_eps: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgoConfig {
    pub xi: Vec<f64>,
    /// Semiclassical parameters of the remainder sweep, descending.
    pub h_sweep: Vec<f64>,
}

impl Default for CgoConfig {
    fn default() -> Self {
        CgoConfig {
            xi: vec![0.3, 0.4],
            h_sweep: vec![1.6, 0.8, 0.4, 0.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    /// Second factor, compared against `scenario`.
    pub other: ScenarioSpec,
    #[serde(default)]
    pub params: ComparisonParams,
}

/// Pass thresholds of the checks recorded in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub derivation: f64,
    pub derivation_samples: usize,
    pub newton_iterations: usize,
    /// Bound on `r_{k+1} / r_k^2` in the quadratic tail.
    pub quadratic_tail: f64,
    pub first_slope: f64,
    pub second_slope: f64,
    /// Levels whose slopes must reach the minimum.
    pub slope_levels: usize,
    /// Accepted band of second-order halving ratios.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub zeta: f64,
    pub zeta_samples: usize,
    pub cauchy: f64,
    pub remainder_slack: f64,
    /// Relative to the largest phase value.
    pub phase: f64,
    pub fourier: f64,
    pub field: f64,
    pub scaling: f64,
    /// Largest accepted ratio of an error to its predicted floor.
    pub safety: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            derivation: 1e-10,
            derivation_samples: 20,
            newton_iterations: 8,
            quadratic_tail: 1e4,
            first_slope: 1.8,
            second_slope: 1.5,
            slope_levels: 3,
            ratio_min: 3.5,
            ratio_max: 4.5,
            zeta: 1e-14,
            zeta_samples: 1000,
            cauchy: 0.01,
            remainder_slack: 0.05,
            phase: 1e-8,
            fourier: 0.10,
            field: 0.20,
            scaling: 0.02,
            safety: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    pub grid: GridConfig,
    pub newton: NewtonConfig,
    pub forward: ForwardConfig,
    pub linearization: LinearizationConfig,
    pub cgo: CgoConfig,
    pub recovery: RecoveryParams,
    pub comparison: Option<ComparisonConfig>,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    /// Seeds the random samples of the derivation and frequency checks.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioSpec::new("bump-cubic", 3),
            grid: GridConfig::default(),
            newton: NewtonConfig::default(),
            forward: ForwardConfig::default(),
            linearization: LinearizationConfig::default(),
            cgo: CgoConfig::default(),
            recovery: RecoveryParams::default(),
            comparison: None,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("minsurf-out"),
            seed: 20240917,
        }
    }
}

/// Every configuration key with its meaning, shown by `--help`.
pub const CONFIG_REFERENCE: &str = "\
CONFIGURATION KEYS (TOML; every key is optional)
  seed                              u64, seeds the random derivation and frequency samples
  output_dir                        directory receiving run.json, tables/ and fields/

  [scenario]                        conformal factor from the catalog
    id                              flat | bump-cubic | quartic | exp-cubic | graded-cubic
    dim                             ambient dimension n (3 or 4)
    alpha                           amplitude of the cubic layer
    gamma                           amplitude of the quartic layer
    kappa                           amplitude of the background bump
    level                           constant value of the flat factor
    center, radius, power           centre, radius and exponent of the layer bump
    background_center               centre of the background bump
    background_radius               radius of the background bump
    rate                            exponent of exp-cubic, one entry per base axis
    extra_layers                    array of {power, amplitude, center, radius,
                                    bump_power, scaled_by_background}

  [grid]
    half_width                      base domain is [-half_width, half_width]^(n-1)
    nodes                           nodes per axis of the working grid
    refinements                     node counts of the refinement studies

  [newton]
    residual_tolerance              sup norm of the residual counted as converged
    max_iterations                  Newton updates per continuation stage
    max_backtracks                  step halvings per update
    continuation_steps              amplitude ramps used when a direct solve fails
    amplitude_bound                 small-data gate on the surrogate norm of the data
    solver                          auto | direct | krylov

  [forward]
    shape                           boundary data, {kind = constant | affine | harmonic
                                    | trig | gaussian, ...}
    amplitudes                      ascending surrogate norms of the amplitude sweep
    euclidean_nodes                 grids of the Scherk convergence study, empty skips it

  [linearization]
    first_eps                       largest level of the dyadic first-order schedule
    second_eps                      largest level of the dyadic second-order schedule
    levels                          number of dyadic levels
    higher_order                    order of the higher-order identity, 0 skips it
    higher_eps                      amplitude of the higher-order stencil

  [cgo]
    xi                              frequency of the remainder sweep
    h_sweep                         descending semiclassical parameters

  [recovery]
    eps                             amplitude levels, the last two are extrapolated
    xi_radius, xi_step              frequency lattice step*Z^d inside the ball
    basis_radius                    largest frequency of the reconstruction basis
    h                               semiclassical parameter of the CGO pairs
    max_remainder                   exclusion threshold on the CGO remainder
    tau                             discrepancy-principle factor
    check_radius                    band of the Fourier-coefficient check
    cauchy.step_factor              Cauchy quadrature step over the grid spacing
    cauchy.radius_factor            Cauchy truncation radius over the support diameter

  [comparison]                      optional; enables the `compare` stage
    other                           second scenario, same keys as [scenario]
    params.probes                   boundary shapes probed, same form as forward.shape
    params.max_order                highest divided-difference order (1..=4)
    params.eps                      amplitude levels, the last two are extrapolated
    params.safety                   discrepancy counts as separated above safety*floor

  [tolerances]
    derivation                      relative tolerance of the residual-form identity
    derivation_samples              random samples per catalog scenario
    newton_iterations               largest accepted Newton iteration count
    quadratic_tail                  bound on r_(k+1)/r_k^2 in the Newton tail
    first_slope, second_slope       minimum epsilon slopes of the divided differences
    slope_levels                    levels that must reach the minimum slope
    ratio_min, ratio_max            band of accepted grid-halving ratios
    zeta                            tolerance of the zeta-pair algebra
    zeta_samples                    random frequencies of the zeta-pair check
    cauchy                          relative L2 tolerance of the Cauchy inversion
    remainder_slack                 slack at the coarsest step of the remainder sweep
    phase                           relative tolerance of the phase cancellation
    fourier                         relative tolerance of recovered Fourier data
    field                           relative L2 tolerance of the recovered field
    scaling                         tolerance of the amplitude-scaling check
    safety                          largest accepted error over predicted floor

ENVIRONMENT
  MINSURF_OUTPUT_DIR                overrides output_dir
";

/// Wave-vector components used when a trigonometric shape gains axes.
const EXTRA_AXES: [f64; 4] = [1.0, 0.5, 0.7, 0.3];

fn fit(v: &mut Vec<f64>, d: usize, pattern: &[f64]) {
    while v.len() < d {
        v.push(pattern.get(v.len()).copied().unwrap_or(0.2));
    }
    v.truncate(d);
}

fn fit_shape(shape: &mut BoundaryShape, d: usize) {
    if let BoundaryShape::Trig { k, .. } = shape {
        fit(k, d, &EXTRA_AXES);
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Replaces the scenario and resizes the frequency and the trigonometric
    /// shapes to the new base dimension, keeping the leading components.
    pub fn set_scenario(&mut self, spec: ScenarioSpec) {
        self.scenario = spec;
        let d = self.base_dim();
        fit(&mut self.cgo.xi, d, &CgoConfig::default().xi);
        fit_shape(&mut self.forward.shape, d);
        if let Some(cmp) = &mut self.comparison {
            cmp.other.dim = self.scenario.dim;
            cmp.params.probes.iter_mut().for_each(|p| fit_shape(p, d));
        }
    }

    pub fn base_dim(&self) -> usize {
        self.scenario.dim.saturating_sub(1)
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::cube(self.base_dim(), self.grid.half_width)
    }

    pub fn grid_with(&self, nodes: usize) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::uniform(self.domain()?, nodes)?))
    }

    pub fn working_grid(&self) -> Result<Arc<Grid>> {
        self.grid_with(self.grid.nodes)
    }

    pub fn factor(&self) -> Result<Arc<ConformalFactor>> {
        Ok(Arc::new(self.scenario.build()?))
    }

    /// Checks the invariants that do not need a solve.
    pub fn validate(&self) -> Result<()> {
        let c = self.factor()?;
        self.newton.validate()?;
        let d = self.base_dim();
        let grid = self.working_grid()?;
        for &n in self.grid.refinements.iter().chain(&self.forward.euclidean_nodes) {
            Grid::uniform(self.domain()?, n)?;
        }
        if self.grid.refinements.windows(2).any(|w| w[0] >= w[1]) {
            return config("grid.refinements must be ascending");
        }
        self.forward.shape.sample(&grid)?;
        let bound = self.newton.amplitude_bound;
        if self.forward.amplitudes.iter().any(|&a| a > bound) {
            return config(format!("forward amplitudes exceed the small-data bound {bound:.3e}"));
        }
        let lin = &self.linearization;
        if lin.levels < 2 {
            return config("linearization needs at least two levels");
        }
        if lin.first_eps > bound || 2.0 * lin.second_eps > bound {
            return config(format!("linearization amplitudes exceed the small-data bound {bound:.3e}"));
        }
        if lin.higher_order > 0 && lin.higher_order as f64 * lin.higher_eps > bound {
            return config(format!("higher-order stencil exceeds the small-data bound {bound:.3e}"));
        }
        if self.cgo.xi.len() != d {
            return config(format!("cgo.xi has {} components, the base dimension is {d}", self.cgo.xi.len()));
        }
        let xi_len = self.cgo.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if self.cgo.h_sweep.iter().any(|h| !(h * xi_len < 2.0) || !(*h > 0.0)) {
            return config("every h of the sweep needs h |xi| < 2");
        }
        if self.cgo.h_sweep.windows(2).any(|w| w[0] <= w[1]) {
            return config("cgo.h_sweep must be descending");
        }
        self.recovery.validate(bound)?;
        if let Some(cmp) = &self.comparison {
            if cmp.other.dim != self.scenario.dim {
                return config("compared scenarios must share the ambient dimension");
            }
            cmp.params.validate(bound)?;
            for p in &cmp.params.probes {
                p.sample(&grid)?;
            }
            boundary_normalization(&c, &cmp.other.build()?, &grid)?;
        }
        let tol = &self.tolerances;
        if !(tol.ratio_min < tol.ratio_max) || !(tol.safety >= 1.0) {
            return config("tolerances need ratio_min < ratio_max and safety >= 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf_keys(v: &toml::Value, out: &mut Vec<String>) {
        if let toml::Value::Table(t) = v {
            for (k, v) in t {
                out.push(k.clone());
                leaf_keys(v, out);
            }
        }
    }

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn reference_documents_every_key() {
        let mut cfg = ExperimentConfig::default();
        cfg.comparison = Some(ComparisonConfig {
            other: ScenarioSpec::new("bump-cubic", 3).with_alpha(2.0),
            params: ComparisonParams::default(),
        });
        let value: toml::Value = toml::from_str(&cfg.to_toml_string().unwrap()).unwrap();
        let mut keys = Vec::new();
        leaf_keys(&value, &mut keys);
        let all_scenario = toml::Value::try_from(ScenarioSpec {
            alpha: Some(1.0),
            gamma: Some(1.0),
            kappa: Some(1.0),
            level: Some(1.0),
            center: Some(vec![0.0]),
            radius: Some(1.0),
            power: Some(1),
            background_center: Some(vec![0.0]),
            background_radius: Some(1.0),
            rate: Some(vec![0.0]),
            ..Default::default()
        })
        .unwrap();
        leaf_keys(&all_scenario, &mut keys);
        for k in keys {
            assert!(CONFIG_REFERENCE.contains(&k), "undocumented key `{k}`");
        }
    }

    #[test]
    fn set_scenario_resizes_to_the_new_dimension() {
        let mut cfg = ExperimentConfig::default();
        cfg.set_scenario(ScenarioSpec::new("quartic", 4));
        assert_eq!(cfg.cgo.xi.len(), 3);
        assert!(matches!(&cfg.forward.shape, BoundaryShape::Trig { k, .. } if k.len() == 3));
        cfg.validate().unwrap();
        cfg.set_scenario(ScenarioSpec::new("flat", 3));
        assert_eq!(cfg.cgo.xi, vec![0.3, 0.4]);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("[grid]\nnode = 3\n").is_err());
        assert!(ExperimentConfig::from_toml_str("sed = 3\n").is_err());
    }

    #[test]
    fn inconsistent_configs_are_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.scenario.id = "nope".into();
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.cgo.xi = vec![1.0, 0.0, 0.0];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.cgo.h_sweep = vec![5.0, 1.0];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.recovery.eps = vec![0.04, 0.02];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.comparison = Some(ComparisonConfig {
            other: ScenarioSpec {
                level: Some(2.0),
                ..ScenarioSpec::new("flat", 3)
            },
            params: ComparisonParams::default(),
        });
        cfg.scenario = ScenarioSpec::new("flat", 3);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parses_a_hand_written_file() {
        let text = r#"
seed = 3
output_dir = "out"
[scenario]
id = "quartic"
dim = 3
gamma = 2.0
[forward]
shape = { kind = "affine", a = [1.0, 0.5] }
[comparison]
other = { id = "quartic", dim = 3, gamma = 4.0 }
[comparison.params]
max_order = 3
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.scenario.gamma, Some(2.0));
        assert_eq!(cfg.comparison.as_ref().unwrap().params.max_order, 3);
        cfg.validate().unwrap();
    }
}
