//! Newton solution of the discrete minimal surface problem and the
//! simulated Dirichlet-to-Neumann map.

pub mod boundary;
pub mod discrete;
pub mod newton;
pub mod records;

pub use boundary::{surrogate_norm, BoundaryShape};
pub use newton::{has_quadratic_tail, quadratic_tail_constant, solve_mse, ForwardSolver, NewtonConfig, SolveResult};
pub use records::{amplitude_sweep, dn_map, DnMeta, DnRecord, SweepRow, SweepTable};
