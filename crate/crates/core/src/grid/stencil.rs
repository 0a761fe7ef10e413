//! Second-order finite differences: centred in the interior, one-sided at
//! the ends of each axis.

use super::{FieldValue, Grid, NodeField, SampleField, Side};
use crate::geometry::MAX_BASE_DIM;

/// 1-D stencil in index offsets, weights not yet divided by `h^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub offsets: [isize; 4],
    pub weights: [f64; 4],
    pub len: usize,
}

impl Stencil {
    fn new(offsets: &[isize], weights: &[f64]) -> Self {
        let mut s = Stencil {
            offsets: [0; 4],
            weights: [0.0; 4],
            len: offsets.len(),
        };
        s.offsets[..s.len].copy_from_slice(offsets);
        s.weights[..s.len].copy_from_slice(weights);
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        (0..self.len).map(move |k| (self.offsets[k], self.weights[k]))
    }
}

/// First derivative stencil at index `i` of an axis with `n` nodes.
pub fn first_weights(i: usize, n: usize) -> Stencil {
    if i == 0 {
        Stencil::new(&[0, 1, 2], &[-1.5, 2.0, -0.5])
    } else if i == n - 1 {
        Stencil::new(&[0, -1, -2], &[1.5, -2.0, 0.5])
    } else {
        Stencil::new(&[-1, 1], &[-0.5, 0.5])
    }
}

/// Second derivative stencil at index `i` of an axis with `n` nodes.
pub fn second_weights(i: usize, n: usize) -> Stencil {
    if i == 0 {
        Stencil::new(&[0, 1, 2, 3], &[2.0, -5.0, 4.0, -1.0])
    } else if i == n - 1 {
        Stencil::new(&[0, -1, -2, -3], &[2.0, -5.0, 4.0, -1.0])
    } else {
        Stencil::new(&[-1, 0, 1], &[1.0, -2.0, 1.0])
    }
}

fn shift(node: usize, offset: isize, stride: usize) -> usize {
    (node as isize + offset * stride as isize) as usize
}

/// `d_a u` at one node.
pub fn d1<T: FieldValue>(grid: &Grid, values: &[T], node: usize, a: usize) -> T {
    let i = grid.index(node)[a];
    let st = first_weights(i, grid.shape()[a]);
    let stride = grid.stride(a);
    let mut acc = T::zero();
    for (o, w) in st.iter() {
        acc += values[shift(node, o, stride)] * w;
    }
    acc * (1.0 / grid.spacing()[a])
}

/// `d_a d_a u` at one node.
pub fn d2<T: FieldValue>(grid: &Grid, values: &[T], node: usize, a: usize) -> T {
    let i = grid.index(node)[a];
    let st = second_weights(i, grid.shape()[a]);
    let stride = grid.stride(a);
    let mut acc = T::zero();
    for (o, w) in st.iter() {
        acc += values[shift(node, o, stride)] * w;
    }
    let h = grid.spacing()[a];
    acc * (1.0 / (h * h))
}

/// `d_a d_b u` for `a != b`: tensor product of first-derivative stencils,
/// which is symmetric in `(a, b)`.
pub fn d11<T: FieldValue>(grid: &Grid, values: &[T], node: usize, a: usize, b: usize) -> T {
    let idx = grid.index(node);
    let sa = first_weights(idx[a], grid.shape()[a]);
    let sb = first_weights(idx[b], grid.shape()[b]);
    let (ta, tb) = (grid.stride(a), grid.stride(b));
    let mut acc = T::zero();
    for (oa, wa) in sa.iter() {
        let na = shift(node, oa, ta);
        for (ob, wb) in sb.iter() {
            acc += values[shift(na, ob, tb)] * (wa * wb);
        }
    }
    acc * (1.0 / (grid.spacing()[a] * grid.spacing()[b]))
}

pub type Vector<T> = [T; MAX_BASE_DIM];
pub type Matrix<T> = [[T; MAX_BASE_DIM]; MAX_BASE_DIM];

/// Gradient at every node.
pub fn gradient_fd<T: FieldValue>(field: &NodeField<T>) -> Vec<Vector<T>> {
    let grid = field.grid();
    let d = grid.dim();
    (0..grid.len())
        .map(|node| {
            let mut g = [T::zero(); MAX_BASE_DIM];
            for (a, ga) in g.iter_mut().enumerate().take(d) {
                *ga = d1(grid, field.values(), node, a);
            }
            g
        })
        .collect()
}

/// Hessian at every node, symmetric by construction.
pub fn hessian_fd<T: FieldValue>(field: &NodeField<T>) -> Vec<Matrix<T>> {
    let grid = field.grid();
    let d = grid.dim();
    (0..grid.len())
        .map(|node| {
            let mut h = [[T::zero(); MAX_BASE_DIM]; MAX_BASE_DIM];
            for a in 0..d {
                h[a][a] = d2(grid, field.values(), node, a);
                for b in (a + 1)..d {
                    let m = d11(grid, field.values(), node, a, b);
                    h[a][b] = m;
                    h[b][a] = m;
                }
            }
            h
        })
        .collect()
}

pub fn laplacian_fd<T: FieldValue>(field: &NodeField<T>) -> NodeField<T> {
    let grid = field.grid();
    let d = grid.dim();
    let values = (0..grid.len())
        .map(|node| {
            let mut acc = T::zero();
            for a in 0..d {
                acc += d2(grid, field.values(), node, a);
            }
            acc
        })
        .collect();
    NodeField::from_raw(grid.clone(), values)
}

/// Outward normal derivative on every boundary sample, using the one-sided
/// three-point stencil along the face normal.
pub fn normal_derivative<T: FieldValue>(field: &NodeField<T>) -> SampleField<T> {
    let grid = field.grid();
    let values = grid
        .samples()
        .iter()
        .map(|s| {
            let g = d1(grid, field.values(), s.node, s.axis);
            match s.side {
                Side::Low => -g,
                Side::High => g,
            }
        })
        .collect();
    SampleField::from_raw(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain, ScalarField};
    use std::sync::Arc;

    fn grid2(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(Domain::new(&[-0.3, 0.1], &[1.1, 1.7]).unwrap(), n).unwrap())
    }

    #[test]
    fn exact_on_affine() {
        let g = grid2(11);
        let u = ScalarField::from_fn(g.clone(), |x| 0.7 * x[0] - 1.3 * x[1] + 0.2);
        for (grad, hess) in gradient_fd(&u).iter().zip(hessian_fd(&u)) {
            assert!((grad[0] - 0.7).abs() < 1e-12 && (grad[1] + 1.3).abs() < 1e-12);
            assert!(hess.iter().flatten().all(|v| v.abs() < 1e-10));
        }
        let dn = normal_derivative(&u);
        for (s, v) in g.samples().iter().zip(dn.values()) {
            let n = s.normal();
            assert!((v - (0.7 * n[0] - 1.3 * n[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_on_quadratics() {
        let g = Arc::new(Grid::uniform(Domain::cube(3, 1.0).unwrap(), 9).unwrap());
        let u = ScalarField::from_fn(g.clone(), |x| x.iter().map(|v| v * v).sum::<f64>() + x[0] * x[2]);
        let lap = laplacian_fd(&u);
        assert!(lap.values().iter().all(|v| (v - 6.0).abs() < 1e-10));
        let h = hessian_fd(&u);
        for m in &h {
            assert!((m[0][2] - 1.0).abs() < 1e-10 && (m[2][0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_has_zero_normal_derivative() {
        let g = grid2(9);
        let u = ScalarField::from_fn(g, |_| 4.2);
        assert!(normal_derivative(&u).sup_norm() < 1e-12);
    }

    #[test]
    fn laplacian_error_halves_at_second_order() {
        let err = |n: usize| {
            let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), n).unwrap());
            let u = ScalarField::from_fn(g.clone(), |x| x[0].sin() * x[1].sin());
            let lap = laplacian_fd(&u);
            (0..g.len())
                .map(|k| {
                    let x = g.coord(k);
                    (lap.get(k) + 2.0 * x[0].sin() * x[1].sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(33), err(65));
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn radial_normal_derivative_second_order() {
        let err = |n: usize| {
            let g = grid2(n);
            let u = ScalarField::from_fn(g.clone(), |x| x[0] * x[0] * x[0] + x[1] * x[1] * x[0]);
            let dn = normal_derivative(&u);
            g.samples()
                .iter()
                .zip(dn.values())
                .map(|(s, v)| {
                    let x = g.coord(s.node);
                    let grad = [3.0 * x[0] * x[0] + x[1] * x[1], 2.0 * x[0] * x[1]];
                    let nn = s.normal();
                    (v - grad[0] * nn[0] - grad[1] * nn[1]).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(17) / err(33);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}
