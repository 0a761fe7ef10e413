use super::csr::CsrMatrix;
use crate::error::Error;
use crate::Result;

/// Banded LU factorization without pivoting.
///
/// The discrete elliptic operators assembled here are diagonally dominant
/// up to lower-order terms, so pivoting is not needed; the smallest pivot
/// ratio is recorded as a conditioning indicator instead.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    data: Vec<f64>,
    pivot_ratio: f64,
}

impl BandLu {
    /// Storage in bytes needed to factor `a`.
    pub fn storage_bytes(a: &CsrMatrix) -> usize {
        let (kl, ku) = a.bandwidths();
        a.nrows() * (kl + ku + 1) * std::mem::size_of::<f64>()
    }

    /// Rough flop count of the factorization.
    pub fn factor_flops(a: &CsrMatrix) -> f64 {
        let (kl, ku) = a.bandwidths();
        2.0 * a.nrows() as f64 * kl as f64 * ku as f64
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::LinearSolve("band LU needs a square matrix".into()));
        }
        let (kl, ku) = a.bandwidths();
        let w = kl + ku + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                data[i * w + j + kl - i] = v;
            }
        }
        let scale = a.inf_norm().max(f64::MIN_POSITIVE);
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for k in 0..n {
            let piv = data[k * w + kl];
            let ap = piv.abs();
            if !(ap > 1e-14 * scale) {
                return Err(Error::Singular(format!(
                    "zero pivot {piv:e} at row {k} (matrix norm {scale:e})"
                )));
            }
            min_pivot = min_pivot.min(ap);
            max_pivot = max_pivot.max(ap);
            let jmax = (k + ku).min(n - 1);
            let (head, tail) = data.split_at_mut((k + 1) * w);
            let row_k = &head[k * w + kl - k + k + 1..=k * w + kl - k + jmax];
            for i in (k + 1)..=(k + kl).min(n - 1) {
                let base = (i - k - 1) * w;
                let lik = base + k + kl - i;
                if tail[lik] == 0.0 {
                    continue;
                }
                let l = tail[lik] / piv;
                tail[lik] = l;
                let start = base + k + 1 + kl - i;
                let row_i = &mut tail[start..start + row_k.len()];
                for (x, y) in row_i.iter_mut().zip(row_k) {
                    *x -= l * y;
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            w,
            data,
            pivot_ratio: min_pivot / max_pivot,
        })
    }

    /// Smallest over largest pivot magnitude.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.w);
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let base = i * w + kl - i;
            let mut acc = b[i];
            for j in j0..i {
                acc -= self.data[base + j] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let base = i * w + kl - i;
            let jmax = (i + ku).min(n - 1);
            let mut acc = b[i];
            for j in (i + 1)..=jmax {
                acc -= self.data[base + j] * b[j];
            }
            b[i] = acc / self.data[base + i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::csr::CsrBuilder;

    #[test]
    fn solves_tridiagonal_system() {
        let n = 50;
        let mut b = CsrBuilder::new(n, 3 * n);
        for i in 0..n {
            if i > 0 {
                b.push(i - 1, -1.0);
            }
            b.push(i, 2.5);
            if i + 1 < n {
                b.push(i + 1, -1.2);
            }
            b.finish_row();
        }
        let a = b.build();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut rhs = a.mul_vec(&x);
        let lu = BandLu::factor(&a).unwrap();
        lu.solve_in_place(&mut rhs);
        for (p, q) in rhs.iter().zip(&x) {
            assert!((p - q).abs() < 1e-13);
        }
        assert!(lu.pivot_ratio() > 0.0 && lu.pivot_ratio() <= 1.0);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut b = CsrBuilder::new(2, 4);
        b.push(0, 0.0);
        b.push(1, 1.0);
        b.finish_row();
        b.push(0, 1.0);
        b.finish_row();
        assert!(matches!(BandLu::factor(&b.build()), Err(Error::Singular(_))));
    }
}
