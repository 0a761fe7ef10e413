//! Conformal factors, Christoffel symbols and the residual forms of the
//! minimal surface equation.

pub mod catalog;
pub mod factor;
pub mod fields;
pub mod profile;
pub mod residual;

pub use catalog::{catalog, LayerSpec, ScenarioSpec, CATALOG_IDS};
pub use factor::{Admissibility, ConformalFactor, FactorJet, NormalTerm, MAX_DIM};
pub use fields::{divergence_residual, graph_residual, implicit_residual, AnalyticJets, GridJets, JetSource};
pub use profile::{Bump, GradientSupport, MultiIndex, Profile, MAX_BASE_DIM};
pub use residual::{
    christoffel, divergence_form, eval_f, f_partials, implicit_form, Christoffel, FPartials, JetPoint,
};
