//! Complex frequency pairs `zeta_1, zeta_2` with `zeta_j . zeta_j = 0` and
//! `zeta_1 + zeta_2 = i h xi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error};
use crate::Result;

const FRAME_TOL: f64 = 1e-12;

/// Bilinear (not Hermitian) product `a . b`.
pub fn bilinear(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `mu_1 + i mu_2`.
fn combine(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
}

/// Orthonormal frame `(mu_1, mu_2)` attached to a frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
}

/// `true` when the first nonzero component of `xi` is positive.
fn upper_half(xi: &[f64]) -> bool {
    xi.iter().find(|v| **v != 0.0).map_or(true, |v| *v > 0.0)
}

/// Deterministic frame for `xi`. Frequencies in the lower half space reuse
/// the frame of `-xi` so that the pair of `-xi` is the complex conjugate of
/// the pair of `xi`.
pub fn canonical_frame(xi: &[f64]) -> Result<Frame> {
    let d = xi.len();
    if d < 2 {
        return Err(Error::Unsupported("frequency frames need dimension at least 2".into()));
    }
    if d > 3 {
        return Err(Error::Unsupported(format!("frequency frames in dimension {d}")));
    }
    let len = norm(xi);
    if !(len > 0.0) || !len.is_finite() {
        return domain("zero frequency has no zeta pair; use the constant test function");
    }
    if !upper_half(xi) {
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let f = canonical_frame(&neg)?;
        return Ok(match d {
            2 => Frame {
                mu1: f.mu1,
                mu2: xi.iter().map(|v| v / len).collect(),
            },
            _ => Frame {
                mu1: f.mu1,
                mu2: f.mu2.iter().map(|v| -v).collect(),
            },
        });
    }
    let unit: Vec<f64> = xi.iter().map(|v| v / len).collect();
    if d == 2 {
        return Ok(Frame {
            mu1: vec![-unit[1], unit[0]],
            mu2: unit,
        });
    }
    // Axis least aligned with xi, projected and normalized.
    let axis = (0..3)
        .min_by(|&a, &b| unit[a].abs().partial_cmp(&unit[b].abs()).unwrap())
        .unwrap();
    let mut e = vec![0.0; 3];
    e[axis] = 1.0;
    let proj = dot(&e, &unit);
    let raw: Vec<f64> = e.iter().zip(&unit).map(|(a, u)| a - proj * u).collect();
    let l = norm(&raw);
    let mu1: Vec<f64> = raw.iter().map(|v| v / l).collect();
    let mu2 = vec![
        unit[1] * mu1[2] - unit[2] * mu1[1],
        unit[2] * mu1[0] - unit[0] * mu1[2],
        unit[0] * mu1[1] - unit[1] * mu1[0],
    ];
    Ok(Frame { mu1, mu2 })
}

/// One member of a pair: `zeta`, its `h`-independent direction `zeta0`, and
/// the exponential rate `zeta / h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgoPhase {
    pub zeta: Vec<Complex64>,
    pub zeta0: Vec<Complex64>,
    pub h: f64,
    pub rate: Vec<Complex64>,
}

impl CgoPhase {
    /// Uses `zeta0` itself as the frequency.
    pub fn from_limit(zeta0: &[Complex64], h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return domain("h must be positive");
        }
        let rate = zeta0.iter().map(|z| z / h).collect();
        Ok(CgoPhase {
            zeta: zeta0.to_vec(),
            zeta0: zeta0.to_vec(),
            h,
            rate,
        })
    }

    pub fn dim(&self) -> usize {
        self.zeta.len()
    }

    pub fn conj(&self) -> Self {
        CgoPhase {
            zeta: self.zeta.iter().map(|z| z.conj()).collect(),
            zeta0: self.zeta0.iter().map(|z| z.conj()).collect(),
            h: self.h,
            rate: self.rate.iter().map(|z| z.conj()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaPair {
    pub xi: Vec<f64>,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub h: f64,
    pub zeta1: Vec<Complex64>,
    pub zeta2: Vec<Complex64>,
    pub rate1: Vec<Complex64>,
    pub rate2: Vec<Complex64>,
}

/// Builds the pair for frequency `xi` at semiclassical parameter `h`.
///
/// In three dimensions `zeta_{1,2} = +-mu_1 + i h xi / 2 +- i s mu_2` with
/// `s = sqrt(1 - h^2 |xi|^2 / 4)`. In two dimensions there is no direction
/// orthogonal to both `xi` and `mu_1`, and the pair is
/// `zeta_{1,2} = +-(h |xi| / 2) mu_1 + i h xi / 2` with `mu_1 _|_ xi` and
/// `mu_2 = xi / |xi|`; its rates `zeta / h` do not depend on `h`.
pub fn make_zeta_pair(xi: &[f64], h: f64, frame: Option<&Frame>) -> Result<ZetaPair> {
    let d = xi.len();
    let canonical;
    let frame = match frame {
        Some(f) => f,
        None => {
            canonical = canonical_frame(xi)?;
            &canonical
        }
    };
    if d < 2 || d > 3 {
        return Err(Error::Unsupported(format!("zeta pairs in dimension {d}")));
    }
    let len = norm(xi);
    if !(len > 0.0) {
        return domain("zero frequency has no zeta pair; use the constant test function");
    }
    if !(h > 0.0) || !h.is_finite() {
        return domain(format!("h must be positive and finite, got {h}"));
    }
    if !(h * len < 2.0) {
        return domain(format!("h |xi| = {:.4} must stay below 2", h * len));
    }
    check_frame(xi, frame)?;
    let (mu1, mu2) = (&frame.mu1, &frame.mu2);
    let half: Vec<f64> = xi.iter().map(|v| 0.5 * h * v).collect();
    let (zeta1, zeta2, rate1, rate2) = if d == 2 {
        let a = 0.5 * h * len;
        let z1 = combine(&mu1.iter().map(|m| a * m).collect::<Vec<_>>(), &half);
        let z2 = combine(&mu1.iter().map(|m| -a * m).collect::<Vec<_>>(), &half);
        let b = 0.5 * len;
        let halfrate: Vec<f64> = xi.iter().map(|v| 0.5 * v).collect();
        let r1 = combine(&mu1.iter().map(|m| b * m).collect::<Vec<_>>(), &halfrate);
        let r2 = combine(&mu1.iter().map(|m| -b * m).collect::<Vec<_>>(), &halfrate);
        (z1, z2, r1, r2)
    } else {
        let s = (1.0 - 0.25 * h * h * len * len).sqrt();
        let im1: Vec<f64> = half.iter().zip(mu2).map(|(a, m)| a + s * m).collect();
        let im2: Vec<f64> = half.iter().zip(mu2).map(|(a, m)| a - s * m).collect();
        let z1 = combine(mu1, &im1);
        let z2 = combine(&mu1.iter().map(|m| -m).collect::<Vec<_>>(), &im2);
        let r1 = z1.iter().map(|z| z / h).collect();
        let r2 = z2.iter().map(|z| z / h).collect();
        (z1, z2, r1, r2)
    };
    Ok(ZetaPair {
        xi: xi.to_vec(),
        mu1: mu1.clone(),
        mu2: mu2.clone(),
        h,
        zeta1,
        zeta2,
        rate1,
        rate2,
    })
}

fn check_frame(xi: &[f64], f: &Frame) -> Result<()> {
    let d = xi.len();
    if f.mu1.len() != d || f.mu2.len() != d {
        return config("frame vectors must match the frequency dimension");
    }
    let len = norm(xi);
    let bad = (norm(&f.mu1) - 1.0).abs() > FRAME_TOL
        || (norm(&f.mu2) - 1.0).abs() > FRAME_TOL
        || dot(&f.mu1, &f.mu2).abs() > FRAME_TOL
        || dot(&f.mu1, xi).abs() > FRAME_TOL * len;
    if bad {
        return config("frame must be orthonormal with mu_1 orthogonal to xi");
    }
    if d == 3 && dot(&f.mu2, xi).abs() > FRAME_TOL * len {
        return config("mu_2 must be orthogonal to xi");
    }
    if d == 2 && (dot(&f.mu2, xi) - len).abs() > FRAME_TOL * len {
        return config("in two dimensions mu_2 must be xi / |xi|");
    }
    Ok(())
}

impl ZetaPair {
    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    /// `h`-independent directions of the two members.
    pub fn zeta0(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let z1 = combine(&self.mu1, &self.mu2);
        let z2 = if self.dim() == 2 {
            combine(&self.mu1.iter().map(|m| -m).collect::<Vec<_>>(), &self.mu2)
        } else {
            z1.iter().map(|z| -z).collect()
        };
        (z1, z2)
    }

    pub fn phases(&self) -> (CgoPhase, CgoPhase) {
        let (z01, z02) = self.zeta0();
        (
            CgoPhase {
                zeta: self.zeta1.clone(),
                zeta0: z01,
                h: self.h,
                rate: self.rate1.clone(),
            },
            CgoPhase {
                zeta: self.zeta2.clone(),
                zeta0: z02,
                h: self.h,
                rate: self.rate2.clone(),
            },
        )
    }

    /// Largest of `|zeta_1 . zeta_1|`, `|zeta_2 . zeta_2|` and
    /// `|zeta_1 + zeta_2 - i h xi|`.
    pub fn defect(&self) -> f64 {
        let sum = self
            .zeta1
            .iter()
            .zip(&self.zeta2)
            .zip(&self.xi)
            .map(|((a, b), x)| (a + b - Complex64::new(0.0, self.h * x)).norm())
            .fold(0.0, f64::max);
        bilinear(&self.zeta1, &self.zeta1)
            .norm()
            .max(bilinear(&self.zeta2, &self.zeta2).norm())
            .max(sum)
    }
}
