//! End-to-end experiments: configuration, recovery, comparison and reports.

pub mod compare;
pub mod config;
pub mod derivation;
pub mod recover;
pub mod report;
pub mod stages;
pub mod tikhonov;

pub use recover::{
    basis_modes, boundary_functional, box_fourier, constants_probe, is_canonical, recover_d3c, recovery_weight,
    weighted_truth, xi_lattice, ConstantsProbe, Exclusion, FunctionalValue, Recovery, RecoveryErrors,
    RecoveryParams, RecoveryRow,
};
pub use tikhonov::{solve_discrepancy, TikhonovReport, TikhonovSolution};
pub use compare::{
    boundary_normalization, verify_theorem_consistency, ComparisonParams, ComparisonReport, OrderRow, TaylorRow,
};
pub use config::{
    CgoConfig, ComparisonConfig, ExperimentConfig, ForwardConfig, GridConfig, LinearizationConfig, Tolerances,
    CONFIG_REFERENCE,
};
pub use derivation::{derivation_check, relative_defect, AnalyticGraph, DerivationRow};
pub use report::{render_text, Cell, Check, ExperimentRun, Failure, RunSummary, Stage, StageRecorder, Table};
pub use stages::{run_stage, STAGES, AFFINE_TOL};
