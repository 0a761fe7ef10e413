//! Uniform tensor grids on rectangles, finite-difference stencils and
//! quadrature.

mod field;
pub mod io;
pub mod quadrature;
pub mod stencil;

pub use field::{BoundaryField, ComplexBoundaryField, ComplexField, FieldValue, NodeField, SampleField, ScalarField};
pub use quadrature::{integrate_boundary, integrate_interior};
pub use stencil::{gradient_fd, hessian_fd, laplacian_fd, normal_derivative};

use serde::{Deserialize, Serialize};

use crate::error::config;
use crate::geometry::MAX_BASE_DIM;
use crate::Result;

/// Smallest number of nodes per axis.
pub const MIN_NODES: usize = 9;

/// Axis-aligned box `[lower, upper]` in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() || lower.len() > MAX_BASE_DIM {
            return config("domain corners must have equal length in 1..=3");
        }
        if lower.iter().zip(upper).any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
            return config("domain upper corner must exceed the lower corner componentwise");
        }
        Ok(Domain {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        })
    }

    /// The cube `[-r, r]^d`.
    pub fn cube(dim: usize, r: f64) -> Result<Self> {
        Self::new(&vec![-r; dim], &vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| (b - a).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Low,
    High,
}

/// One boundary sample: a boundary node seen from one of its faces. Corner
/// and edge nodes carry one sample per incident face, each with that face's
/// outward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub node: usize,
    pub axis: usize,
    pub side: Side,
    /// Trapezoid weight of the sample within its face.
    pub weight: f64,
}

impl BoundarySample {
    pub fn normal(&self) -> [f64; MAX_BASE_DIM] {
        let mut n = [0.0; MAX_BASE_DIM];
        n[self.axis] = match self.side {
            Side::Low => -1.0,
            Side::High => 1.0,
        };
        n
    }
}

/// Uniform Cartesian grid. Nodes are numbered with axis 0 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    shape: [usize; MAX_BASE_DIM],
    spacing: [f64; MAX_BASE_DIM],
    strides: [usize; MAX_BASE_DIM],
    len: usize,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    /// Node to interior unknown index, `usize::MAX` on the boundary.
    unknown: Vec<usize>,
    samples: Vec<BoundarySample>,
    /// Boundary node to its sample ids.
    node_samples: Vec<Vec<usize>>,
    boundary_slot: Vec<usize>,
}

/// Metadata written alongside artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub domain: Domain,
    pub nodes_per_axis: Vec<usize>,
    pub spacing: Vec<f64>,
}

impl Grid {
    pub fn new(domain: Domain, nodes_per_axis: &[usize]) -> Result<Self> {
        let d = domain.dim();
        if nodes_per_axis.len() != d {
            return config(format!(
                "grid needs {d} node counts, got {}",
                nodes_per_axis.len()
            ));
        }
        if let Some(&n) = nodes_per_axis.iter().find(|&&n| n < MIN_NODES) {
            return config(format!("grid too small: {n} nodes on an axis, need at least {MIN_NODES}"));
        }
        let mut shape = [1usize; MAX_BASE_DIM];
        let mut spacing = [0.0; MAX_BASE_DIM];
        let mut strides = [0usize; MAX_BASE_DIM];
        let mut stride = 1;
        for a in 0..d {
            shape[a] = nodes_per_axis[a];
            spacing[a] = (domain.upper[a] - domain.lower[a]) / (shape[a] - 1) as f64;
            strides[a] = stride;
            stride *= shape[a];
        }
        let len = stride;
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let mut unknown = vec![usize::MAX; len];
        let mut boundary_slot = vec![usize::MAX; len];
        for node in 0..len {
            let idx = Self::split_index(node, &shape, d);
            let on_boundary = (0..d).any(|a| idx[a] == 0 || idx[a] == shape[a] - 1);
            if on_boundary {
                boundary_slot[node] = boundary.len();
                boundary.push(node);
            } else {
                unknown[node] = interior.len();
                interior.push(node);
            }
        }
        let mut samples = Vec::new();
        let mut node_samples = vec![Vec::new(); boundary.len()];
        for a in 0..d {
            for side in [Side::Low, Side::High] {
                let fixed = match side {
                    Side::Low => 0,
                    Side::High => shape[a] - 1,
                };
                for &node in &boundary {
                    let idx = Self::split_index(node, &shape, d);
                    if idx[a] != fixed {
                        continue;
                    }
                    let mut weight = 1.0;
                    for b in (0..d).filter(|&b| b != a) {
                        let w = if idx[b] == 0 || idx[b] == shape[b] - 1 { 0.5 } else { 1.0 };
                        weight *= w * spacing[b];
                    }
                    node_samples[boundary_slot[node]].push(samples.len());
                    samples.push(BoundarySample {
                        node,
                        axis: a,
                        side,
                        weight,
                    });
                }
            }
        }
        Ok(Grid {
            domain,
            shape,
            spacing,
            strides,
            len,
            interior,
            boundary,
            unknown,
            samples,
            node_samples,
            boundary_slot,
        })
    }

    /// `n` nodes per axis on `domain`.
    pub fn uniform(domain: Domain, n: usize) -> Result<Self> {
        let d = domain.dim();
        Self::new(domain, &vec![n; d])
    }

    fn split_index(node: usize, shape: &[usize; MAX_BASE_DIM], d: usize) -> [usize; MAX_BASE_DIM] {
        let mut idx = [0; MAX_BASE_DIM];
        let mut rest = node;
        for a in 0..d {
            idx[a] = rest % shape[a];
            rest /= shape[a];
        }
        idx
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim()]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim()]
    }

    /// Largest grid spacing.
    pub fn h(&self) -> f64 {
        self.spacing().iter().cloned().fold(0.0, f64::max)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self, node: usize) -> [usize; MAX_BASE_DIM] {
        Self::split_index(node, &self.shape, self.dim())
    }

    pub fn node(&self, index: &[usize]) -> usize {
        (0..self.dim()).map(|a| index[a] * self.strides[a]).sum()
    }

    /// Coordinates of a node; the last node on each axis sits exactly on the
    /// upper corner.
    pub fn coord(&self, node: usize) -> [f64; MAX_BASE_DIM] {
        let idx = self.index(node);
        let mut x = [0.0; MAX_BASE_DIM];
        for a in 0..self.dim() {
            x[a] = if idx[a] == self.shape[a] - 1 {
                self.domain.upper[a]
            } else {
                self.domain.lower[a] + idx[a] as f64 * self.spacing[a]
            };
        }
        x
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.unknown[node] == usize::MAX
    }

    /// Interior unknown index of a node.
    pub fn unknown_index(&self, node: usize) -> Option<usize> {
        let k = self.unknown[node];
        (k != usize::MAX).then_some(k)
    }

    pub fn samples(&self) -> &[BoundarySample] {
        &self.samples
    }

    /// Samples attached to a boundary node.
    pub fn samples_of(&self, node: usize) -> &[usize] {
        let slot = self.boundary_slot[node];
        if slot == usize::MAX {
            &[]
        } else {
            &self.node_samples[slot]
        }
    }

    /// Sample of `node` on the face `(axis, side)`.
    pub fn sample_on_face(&self, node: usize, axis: usize, side: Side) -> Option<usize> {
        self.samples_of(node)
            .iter()
            .copied()
            .find(|&s| self.samples[s].axis == axis && self.samples[s].side == side)
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            domain: self.domain.clone(),
            nodes_per_axis: self.shape().to_vec(),
            spacing: self.spacing().to_vec(),
        }
    }
}
