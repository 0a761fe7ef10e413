//! Composite trapezoid rules on the grid and on its boundary faces.

use super::{FieldValue, Grid, NodeField, SampleField};

/// Trapezoid weight of every node over the closed rectangle.
pub fn node_weights(grid: &Grid) -> Vec<f64> {
    let d = grid.dim();
    (0..grid.len())
        .map(|node| {
            let idx = grid.index(node);
            (0..d)
                .map(|a| {
                    let edge = idx[a] == 0 || idx[a] == grid.shape()[a] - 1;
                    grid.spacing()[a] * if edge { 0.5 } else { 1.0 }
                })
                .product()
        })
        .collect()
}

/// `int_Omega field dx'`.
pub fn integrate_interior<T: FieldValue>(field: &NodeField<T>) -> T {
    let w = node_weights(field.grid());
    let mut acc = T::zero();
    for (v, w) in field.values().iter().zip(w) {
        acc += *v * w;
    }
    acc
}

/// `int_{dOmega} field dS`; each boundary sample carries the trapezoid
/// weight of its own face, so corners count half per incident face.
pub fn integrate_boundary<T: FieldValue>(field: &SampleField<T>) -> T {
    let mut acc = T::zero();
    for (v, s) in field.values().iter().zip(field.grid().samples()) {
        acc += *v * s.weight;
    }
    acc
}

/// Discrete `L^2(Omega)` norm.
pub fn l2_norm<T: FieldValue>(field: &NodeField<T>) -> f64 {
    let w = node_weights(field.grid());
    field
        .values()
        .iter()
        .zip(w)
        .map(|(v, w)| v.modulus().powi(2) * w)
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::stencil::{gradient_fd, laplacian_fd, normal_derivative};
    use crate::grid::{BoundaryField, Domain, ScalarField};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn unit(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(Domain::new(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), n).unwrap())
    }

    #[test]
    fn area_and_perimeter() {
        let g = unit(9);
        let one = ScalarField::from_fn(g.clone(), |_| 1.0);
        assert!((integrate_interior(&one) - 1.0).abs() < 1e-15);
        let b = BoundaryField::from_fn(g, |_| 1.0);
        assert!((integrate_boundary(&b) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn sine_product_second_order() {
        let err = |n: usize| {
            let g = unit(n);
            let f = ScalarField::from_fn(g, |x| (PI * x[0]).sin() * (PI * x[1]).sin());
            (integrate_interior(&f) - 4.0 / (PI * PI)).abs()
        };
        let ratio = err(17) / err(33);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn antisymmetric_field_integrates_to_zero() {
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), 17).unwrap());
        let f = ScalarField::from_fn(g.clone(), |x| x[0].powi(3) * (1.0 + x[1] * x[1]));
        assert!(integrate_interior(&f).abs() < 1e-15);
        assert!(integrate_boundary(&f.trace()).abs() < 1e-15);
    }

    #[test]
    fn discrete_integration_by_parts_is_second_order() {
        let defect = |n: usize| {
            let g = unit(n);
            let u = ScalarField::from_fn(g.clone(), |x| (x[0] + 2.0 * x[1]).sin() + x[0] * x[0] * x[1]);
            let v = ScalarField::from_fn(g.clone(), |x| (1.5 * x[0]).cos() * (1.0 + x[1]));
            let lap = laplacian_fd(&u);
            let gu = gradient_fd(&u);
            let gv = gradient_fd(&v);
            let a = integrate_interior(&lap.zip_with(&v, |a, b| a * b));
            let dot: Vec<f64> = gu.iter().zip(&gv).map(|(p, q)| p[0] * q[0] + p[1] * q[1]).collect();
            let b = integrate_interior(&ScalarField::new(g.clone(), dot).unwrap());
            let c = integrate_boundary(&normal_derivative(&u).zip_with(&v.trace(), |a, b| a * b));
            (a + b - c).abs()
        };
        let ratio = defect(33) / defect(65);
        assert!(ratio > 3.3, "ratio {ratio}");
    }
}
