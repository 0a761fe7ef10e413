//! Boundary data shapes and the discrete surrogate of the `C^s` norm.

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error};
use crate::grid::{BoundaryField, Grid, Side};
use crate::Result;

/// Surrogate norm: the largest of `sup |f|` and the sup norms of the first
/// and second divided differences of `f` along every boundary face.
pub fn surrogate_norm(f: &BoundaryField) -> f64 {
    let grid = f.grid();
    let d = grid.dim();
    let v = f.values();
    let mut norm = f.sup_norm();
    for (k, s) in grid.samples().iter().enumerate() {
        let idx = grid.index(s.node);
        for b in (0..d).filter(|&b| b != s.axis) {
            let h = grid.spacing()[b];
            let stride = grid.stride(b);
            let n = grid.shape()[b];
            let next = (idx[b] + 1 < n).then(|| grid.sample_on_face(s.node + stride, s.axis, s.side)).flatten();
            let prev = (idx[b] > 0).then(|| grid.sample_on_face(s.node - stride, s.axis, s.side)).flatten();
            if let Some(p) = next {
                norm = norm.max((v[p] - v[k]).abs() / h);
            }
            if let (Some(p), Some(m)) = (next, prev) {
                norm = norm.max((v[p] - 2.0 * v[k] + v[m]).abs() / (h * h));
            }
        }
    }
    norm
}

/// Analytic boundary data shapes, selectable from the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryShape {
    /// `1`.
    Constant,
    /// `a . x'`.
    Affine { a: Vec<f64> },
    /// `Re (x_1 + i x_2)^degree`.
    Harmonic { degree: u32 },
    /// `cos(k . x' + phase)`.
    Trig { k: Vec<f64>, phase: f64 },
    /// `exp(-|x' - center|^2 / width^2)`.
    Gaussian { center: Vec<f64>, width: f64 },
}

impl BoundaryShape {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BoundaryShape::Constant => 1.0,
            BoundaryShape::Affine { a } => a.iter().zip(x).map(|(p, q)| p * q).sum(),
            BoundaryShape::Harmonic { degree } => {
                let z = num_complex::Complex64::new(x[0], x[1]);
                z.powu(*degree).re
            }
            BoundaryShape::Trig { k, phase } => (k.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + phase).cos(),
            BoundaryShape::Gaussian { center, width } => {
                let r2: f64 = center.iter().zip(x).map(|(p, q)| (p - q).powi(2)).sum();
                (-r2 / (width * width)).exp()
            }
        }
    }

    /// Raw samples on the boundary, without normalization.
    pub fn sample(&self, grid: &Arc<Grid>) -> Result<BoundaryField> {
        let d = grid.dim();
        let need = match self {
            BoundaryShape::Affine { a } => Some(a.len()),
            BoundaryShape::Trig { k, .. } => Some(k.len()),
            BoundaryShape::Gaussian { center, .. } => Some(center.len()),
            BoundaryShape::Harmonic { .. } if d < 2 => return config("harmonic shape needs d >= 2"),
            _ => None,
        };
        if let Some(n) = need {
            if n != d {
                return config(format!("boundary shape has {n} components, grid dimension is {d}"));
            }
        }
        Ok(BoundaryField::from_fn(grid.clone(), |x| self.eval(x)))
    }

    /// Samples scaled to unit surrogate norm, so that `amplitude * shape`
    /// has surrogate norm `amplitude`.
    pub fn normalized(&self, grid: &Arc<Grid>) -> Result<BoundaryField> {
        let f = self.sample(grid)?;
        let n = surrogate_norm(&f);
        if n == 0.0 {
            return config("boundary shape vanishes on the boundary");
        }
        Ok(f.scale(1.0 / n))
    }
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("expected a number, got `{t}`")))
        })
        .collect()
}

impl FromStr for BoundaryShape {
    type Err = Error;

    /// Forms: `const`, `affine:a1,a2`, `harmonic:3`, `trig:k1,k2[;phase]`,
    /// `gauss:c1,c2;width`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "const" | "constant" => Ok(BoundaryShape::Constant),
            "affine" => Ok(BoundaryShape::Affine { a: numbers(rest)? }),
            "harmonic" => Ok(BoundaryShape::Harmonic {
                degree: rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("harmonic degree must be an integer, got `{rest}`")))?,
            }),
            "trig" => {
                let (k, phase) = rest.split_once(';').unwrap_or((rest, "0"));
                Ok(BoundaryShape::Trig {
                    k: numbers(k)?,
                    phase: numbers(phase)?[0],
                })
            }
            "gauss" => {
                let Some((c, w)) = rest.split_once(';') else {
                    return config("gauss shape needs `center;width`");
                };
                Ok(BoundaryShape::Gaussian {
                    center: numbers(c)?,
                    width: numbers(w)?[0],
                })
            }
            other => config(format!("unknown boundary shape `{other}`")),
        }
    }
}

/// Samples on one face, for tests and reports.
pub fn face_samples(grid: &Grid, axis: usize, side: Side) -> Vec<usize> {
    grid.samples()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.axis == axis && s.side == side)
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    #[test]
    fn surrogate_norm_of_affine_data() {
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), 17).unwrap());
        let f = BoundaryShape::Affine { a: vec![0.5, -2.0] }.sample(&g).unwrap();
        // sup |f| = 2.5 at a corner; tangential slopes are at most 2.
        assert!((surrogate_norm(&f) - 2.5).abs() < 1e-12);
        let n = BoundaryShape::Affine { a: vec![0.5, -2.0] }.normalized(&g).unwrap();
        assert!((surrogate_norm(&n) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn surrogate_norm_sees_curvature() {
        let g = Arc::new(Grid::uniform(Domain::cube(2, 1.0).unwrap(), 33).unwrap());
        let f = BoundaryShape::Trig { k: vec![3.0, 0.0], phase: 0.0 }.sample(&g).unwrap();
        let n = surrogate_norm(&f);
        assert!(n > 8.5 && n <= 9.0, "{n}");
    }

    #[test]
    fn shapes_parse() {
        assert_eq!("const".parse::<BoundaryShape>().unwrap(), BoundaryShape::Constant);
        assert_eq!(
            "affine:1,-2".parse::<BoundaryShape>().unwrap(),
            BoundaryShape::Affine { a: vec![1.0, -2.0] }
        );
        assert_eq!(
            "trig:1,2;0.5".parse::<BoundaryShape>().unwrap(),
            BoundaryShape::Trig { k: vec![1.0, 2.0], phase: 0.5 }
        );
        assert!("gauss:0,0".parse::<BoundaryShape>().is_err());
        assert!("bogus".parse::<BoundaryShape>().is_err());
    }
}
