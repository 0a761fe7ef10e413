use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::Grid;
use crate::error::domain;
use crate::Result;

/// Scalar type stored in fields: `f64` or `Complex64`.
pub trait FieldValue:
    Copy
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(&self) -> f64;
    fn finite(&self) -> bool;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl FieldValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// One value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField<T> {
    grid: Arc<Grid>,
    values: Vec<T>,
}

/// One value per boundary sample (see [`super::BoundarySample`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleField<T> {
    grid: Arc<Grid>,
    values: Vec<T>,
}

pub type ScalarField = NodeField<f64>;
pub type ComplexField = NodeField<Complex64>;
pub type BoundaryField = SampleField<f64>;
pub type ComplexBoundaryField = SampleField<Complex64>;

fn check<T: FieldValue>(values: &[T], expected: usize, what: &str) -> Result<()> {
    if values.len() != expected {
        return domain(format!("{what} has {} values, grid expects {expected}", values.len()));
    }
    if let Some(i) = values.iter().position(|v| !v.finite()) {
        return domain(format!("{what} has a non-finite value at index {i}"));
    }
    Ok(())
}

impl<T: FieldValue> NodeField<T> {
    pub fn new(grid: Arc<Grid>, values: Vec<T>) -> Result<Self> {
        check(&values, grid.len(), "node field")?;
        Ok(NodeField { grid, values })
    }

    /// Internal constructor for values known to be valid.
    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        NodeField { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![T::zero(); grid.len()];
        NodeField { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> T) -> Self {
        let d = grid.dim();
        let values = (0..grid.len()).map(|n| f(&grid.coord(n)[..d])).collect();
        NodeField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, node: usize) -> T {
        self.values[node]
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> NodeField<U> {
        NodeField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with<U: FieldValue, V: FieldValue>(&self, other: &NodeField<U>, f: impl Fn(T, U) -> V) -> NodeField<V> {
        assert!(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid);
        NodeField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Sup norm over interior nodes only.
    pub fn interior_sup_norm(&self) -> f64 {
        self.grid
            .interior()
            .iter()
            .map(|&n| self.values[n].modulus())
            .fold(0.0, f64::max)
    }

    /// Restriction to boundary samples.
    pub fn trace(&self) -> SampleField<T> {
        SampleField {
            grid: self.grid.clone(),
            values: self.grid.samples().iter().map(|s| self.values[s.node]).collect(),
        }
    }
}

impl ScalarField {
    pub fn to_complex(&self) -> ComplexField {
        self.map(|v| Complex64::new(v, 0.0))
    }
}

impl ComplexField {
    pub fn re(&self) -> ScalarField {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> ScalarField {
        self.map(|v| v.im)
    }
}

impl<T: FieldValue> SampleField<T> {
    pub fn new(grid: Arc<Grid>, values: Vec<T>) -> Result<Self> {
        check(&values, grid.samples().len(), "boundary field")?;
        Ok(SampleField { grid, values })
    }

    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.samples().len());
        SampleField { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![T::zero(); grid.samples().len()];
        SampleField { grid, values }
    }

    /// Samples a function of position on every boundary sample.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> T) -> Self {
        let d = grid.dim();
        let values = grid.samples().iter().map(|s| f(&grid.coord(s.node)[..d])).collect();
        SampleField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> SampleField<U> {
        SampleField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with<U: FieldValue, V: FieldValue>(&self, other: &SampleField<U>, f: impl Fn(T, U) -> V) -> SampleField<V> {
        SampleField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Dirichlet value at a boundary node: the mean over its samples.
    pub fn node_value(&self, node: usize) -> T {
        let ids = self.grid.samples_of(node);
        let mut acc = T::zero();
        for &s in ids {
            acc += self.values[s];
        }
        acc * (1.0 / ids.len() as f64)
    }

    /// Largest disagreement between samples sharing a node.
    pub fn corner_mismatch(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &node in self.grid.boundary() {
            let ids = self.grid.samples_of(node);
            for &s in &ids[1..] {
                worst = worst.max((self.values[s] - self.values[ids[0]]).modulus());
            }
        }
        worst
    }

    /// Node field equal to this data on the boundary and `interior` inside.
    pub fn extend(&self, interior: T) -> NodeField<T> {
        let mut values = vec![interior; self.grid.len()];
        for &node in self.grid.boundary() {
            values[node] = self.node_value(node);
        }
        NodeField {
            grid: self.grid.clone(),
            values,
        }
    }
}

impl BoundaryField {
    pub fn to_complex(&self) -> ComplexBoundaryField {
        self.map(|v| Complex64::new(v, 0.0))
    }
}

impl ComplexBoundaryField {
    pub fn re(&self) -> BoundaryField {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> BoundaryField {
        self.map(|v| v.im)
    }
}
