//! First and second linearizations at the zero solution, divided
//! differences of the forward map and the boundary/interior identities.

pub mod adjoint;
pub mod consistency;
pub mod divided;
pub mod higher;
pub mod hyperdual;
pub mod operator;
pub mod second;

pub use adjoint::{adjoint_residual, adjoint_solution};
pub use consistency::{first_consistency, form_agreement, second_consistency, FormAgreement, SlopeReport};
pub use divided::{
    divided_difference, divided_differences, levels_above, observed_slopes, DividedDifference, EpsilonSchedule,
};
pub use higher::{verify_higher_order, HigherOrderReport};
pub use operator::{assemble, Assembled, DirichletProblem, LinearizedOperator};
pub use second::{
    boundary_interior_identity, second_source, solve_second_conductivity, solve_second_lin, third_normal,
    IdentityReport,
};
