//! The explicit positive solution `v0 = c(x', 0)^((n-1)/2)` of the formal
//! adjoint `Lap phi - div(phi b) = 0`.

use crate::grid::{NodeField, ScalarField};

use super::operator::LinearizedOperator;

pub fn adjoint_solution(op: &LinearizedOperator) -> ScalarField {
    let k = (op.factor().dim() as f64 - 1.0) / 2.0;
    let values = op.gamma().iter().map(|g| g.powf(k)).collect();
    NodeField::from_raw(op.grid().clone(), values)
}

/// Interior sup norm of the discrete adjoint applied to `v0`.
pub fn adjoint_residual(op: &LinearizedOperator, v0: &ScalarField) -> f64 {
    op.apply_adjoint(v0).interior_sup_norm()
}
