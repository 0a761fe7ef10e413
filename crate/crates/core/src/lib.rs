//! Numerical laboratory for the inverse problem of recovering a conformal
//! factor from the Dirichlet-to-Neumann map of the minimal surface equation.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] evaluates the conformal factor, its Christoffel symbols and
//!   the minimal surface operator in graph, implicit and divergence form.
//! * [`grid`] provides the Cartesian discretization, finite-difference
//!   stencils, quadrature and field I/O.
//! * [`linalg`] holds the sparse solvers shared by every PDE solve.
//! * [`forward`] solves the nonlinear Dirichlet problem by damped Newton.
//! * [`linearization`] covers the first, second and higher order
//!   linearizations together with epsilon divided differences.
//! * [`cgo`] builds complex geometrical optics solutions.
//! * [`pipeline`] chains everything into a recovery experiment.

pub mod cgo;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod linearization;
pub mod pipeline;

pub use error::{Error, Result};
pub use num_complex::Complex64;
