//! Truncated multilinear numbers `a = sum_S a_S eps^S` over subsets `S` of
//! `m` infinitesimals with `eps_i^2 = 0`. The coefficient of the full set is
//! the mixed derivative `d^m / d eps_1 ... d eps_m` at zero, which is how
//! order-`m` remainders of the graph operator are evaluated numerically.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::config;
use crate::geometry::{ConformalFactor, MAX_BASE_DIM};
use crate::Result;

/// Largest supported number of infinitesimals.
pub const MAX_ORDER: usize = 5;
const LEN: usize = 1 << MAX_ORDER;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multilinear {
    m: usize,
    c: [f64; LEN],
}

impl Multilinear {
    pub fn constant(m: usize, v: f64) -> Self {
        debug_assert!(m <= MAX_ORDER);
        let mut c = [0.0; LEN];
        c[0] = v;
        Multilinear { m, c }
    }

    pub fn zero(m: usize) -> Self {
        Self::constant(m, 0.0)
    }

    pub fn order(&self) -> usize {
        self.m
    }

    fn len(&self) -> usize {
        1 << self.m
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.c[mask]
    }

    pub fn set(&mut self, mask: usize, v: f64) {
        self.c[mask] = v;
    }

    pub fn real(&self) -> f64 {
        self.c[0]
    }

    /// Coefficient of the full product `eps_1 ... eps_m`.
    pub fn top(&self) -> f64 {
        self.c[self.len() - 1]
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in &mut self.c[..1 << self.m] {
            *v *= s;
        }
        self
    }

    /// `1 / a` through the terminating geometric series.
    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut delta = *self;
        delta.c[0] = 0.0;
        let q = delta.scale(-1.0 / a0);
        let mut term = Self::constant(self.m, 1.0);
        let mut sum = term;
        for _ in 0..self.m {
            term = term * q;
            sum = sum + term;
        }
        sum.scale(1.0 / a0)
    }

    /// `sum_k coeffs[k] a^k / k!` for `a` with zero real part.
    pub fn taylor(&self, coeffs: &[f64]) -> Self {
        debug_assert!(self.c[0] == 0.0);
        let mut out = Self::zero(self.m);
        let mut power = Self::constant(self.m, 1.0);
        let mut fact = 1.0;
        for (k, &ck) in coeffs.iter().enumerate().take(self.m + 1) {
            if k > 0 {
                power = power * *self;
                fact *= k as f64;
            }
            if ck != 0.0 {
                out = out + power.scale(ck / fact);
            }
        }
        out
    }
}

impl Add for Multilinear {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(&o.c).take(1 << self.m) {
            *a += b;
        }
        self
    }
}

impl Sub for Multilinear {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Multilinear {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Multilinear {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::zero(self.m);
        for s in 0..self.len() {
            let mut acc = 0.0;
            let mut t = s;
            loop {
                acc += self.c[t] * o.c[s ^ t];
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            out.c[s] = acc;
        }
        out
    }
}

/// Multilinear jet of the graph function at one base point.
#[derive(Debug, Clone)]
pub struct MultilinearJet {
    pub u: Multilinear,
    pub p: [Multilinear; MAX_BASE_DIM],
    pub hess: [[Multilinear; MAX_BASE_DIM]; MAX_BASE_DIM],
}

impl MultilinearJet {
    pub fn zero(m: usize) -> Self {
        let z = Multilinear::zero(m);
        MultilinearJet {
            u: z,
            p: [z; MAX_BASE_DIM],
            hess: [[z; MAX_BASE_DIM]; MAX_BASE_DIM],
        }
    }
}

/// Normal Taylor data of `c` at `(x', 0)` up to the order an `m`-fold
/// expansion needs: `(d_n^k c, grad' d_n^k c)` for `k = 0..=m+1`.
pub fn taylor_data(c: &ConformalFactor, xp: &[f64], m: usize) -> Vec<(f64, [f64; MAX_BASE_DIM])> {
    c.normal_taylor(xp, m as u32 + 1)
}

/// The graph operator `F` evaluated on a multilinear jet around `u = 0`.
/// `taylor[k]` holds `(d_n^k c, grad' d_n^k c)` at `(x', 0)`.
pub fn eval_f_multilinear(
    dim: usize,
    taylor: &[(f64, [f64; MAX_BASE_DIM])],
    jet: &MultilinearJet,
) -> Result<Multilinear> {
    let m = jet.u.order();
    let d = dim - 1;
    if jet.u.real() != 0.0 {
        return config("multilinear expansion must be centred at u = 0");
    }
    if taylor.len() < m + 2 {
        return config(format!("need normal Taylor data up to order {}", m + 1));
    }
    let vals: Vec<f64> = taylor.iter().map(|t| t.0).collect();
    let c = jet.u.taylor(&vals);
    let dn_c = jet.u.taylor(&vals[1..]);
    let inv_c = c.recip();
    let mut tr = Multilinear::zero(m);
    let mut p_dc = Multilinear::zero(m);
    let mut w = Multilinear::constant(m, 1.0);
    let mut ppp = Multilinear::zero(m);
    for i in 0..d {
        let gi: Vec<f64> = taylor.iter().map(|t| t.1[i]).collect();
        let dc_i = jet.u.taylor(&gi);
        tr = tr + jet.hess[i][i];
        p_dc = p_dc + jet.p[i] * dc_i;
        w = w + jet.p[i] * jet.p[i];
        for j in 0..d {
            ppp = ppp + jet.hess[i][j] * jet.p[i] * jet.p[j];
        }
    }
    let k = (dim as f64 - 1.0) / 2.0;
    Ok(-tr - (inv_c * (p_dc - dn_c)).scale(k) + ppp * w.recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{eval_f, f_partials, JetPoint, ScenarioSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, rng: &mut ChaCha8Rng, scale: f64) -> Multilinear {
        let mut a = Multilinear::zero(m);
        for s in 0..(1 << m) {
            a.set(s, scale * rng.gen_range(-1.0..1.0));
        }
        a
    }

    #[test]
    fn product_is_the_mixed_derivative_of_the_product() {
        // (1 + a e1)(2 + b e2) = 2 + 2a e1 + b e2 + ab e1e2
        let mut x = Multilinear::constant(2, 1.0);
        x.set(1, 3.0);
        let mut y = Multilinear::constant(2, 2.0);
        y.set(2, 5.0);
        let z = x * y;
        assert_eq!([z.get(0), z.get(1), z.get(2), z.get(3)], [2.0, 6.0, 5.0, 15.0]);
    }

    #[test]
    fn reciprocal_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 0..=MAX_ORDER {
            let mut a = random(m, &mut rng, 1.0);
            a.set(0, 1.7);
            let one = a * a.recip();
            assert!((one.get(0) - 1.0).abs() < 1e-14);
            for s in 1..(1 << m) {
                assert!(one.get(s).abs() < 1e-13, "m={m} s={s}");
            }
        }
    }

    #[test]
    fn first_order_matches_the_partials() {
        let c = ScenarioSpec::new("exp-cubic", 3).build().unwrap();
        let xp = [0.1, -0.3];
        let t = taylor_data(&c, &xp, 1);
        let mut jet = MultilinearJet::zero(1);
        let (u1, p1, h1) = (0.7, [0.2, -0.4], [[1.1, 0.3], [0.3, -0.5]]);
        jet.u.set(1, u1);
        for i in 0..2 {
            jet.p[i].set(1, p1[i]);
            for j in 0..2 {
                jet.hess[i][j].set(1, h1[i][j]);
            }
        }
        let f = eval_f_multilinear(3, &t, &jet).unwrap();
        let zero = JetPoint::new(&xp, 0.0, &[0.0, 0.0], &[&[0.0, 0.0], &[0.0, 0.0]]).unwrap();
        let fp = f_partials(&c, &zero).unwrap();
        let mut lin = fp.du * u1;
        for i in 0..2 {
            lin += fp.dp[i] * p1[i];
            for j in 0..2 {
                lin += fp.dhess[i][j] * h1[i][j];
            }
        }
        assert!(f.get(0).abs() < 1e-15);
        assert!((f.top() - lin).abs() < 1e-13, "{} vs {lin}", f.top());
    }

    /// Mixed derivative of `eps -> F(sum_S eps^S u_S)` by central finite
    /// differences of the exact operator, with no Taylor data involved.
    #[test]
    fn third_order_matches_finite_differences() {
        let c = ScenarioSpec::new("quartic", 3).build().unwrap();
        let xp = [0.15, 0.05];
        let m = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut jet = MultilinearJet::zero(m);
        jet.u = random(m, &mut rng, 0.8);
        jet.u.set(0, 0.0);
        for i in 0..2 {
            jet.p[i] = random(m, &mut rng, 0.8);
            jet.p[i].set(0, 0.0);
            for j in 0..=i {
                let mut h = random(m, &mut rng, 0.8);
                h.set(0, 0.0);
                jet.hess[i][j] = h;
                jet.hess[j][i] = h;
            }
        }
        let t = taylor_data(&c, &xp, m);
        let exact = eval_f_multilinear(3, &t, &jet).unwrap().top();

        let at = |e: [f64; 3]| {
            let poly = |a: &Multilinear| {
                (1..8usize)
                    .map(|s| a.get(s) * (0..3).filter(|b| s >> b & 1 == 1).map(|b| e[b]).product::<f64>())
                    .sum::<f64>()
            };
            let p = [poly(&jet.p[0]), poly(&jet.p[1])];
            let h0 = [poly(&jet.hess[0][0]), poly(&jet.hess[0][1])];
            let h1 = [poly(&jet.hess[1][0]), poly(&jet.hess[1][1])];
            eval_f(&c, &JetPoint::new(&xp, poly(&jet.u), &p, &[&h0, &h1]).unwrap()).unwrap()
        };
        let h = 1e-3;
        let mut fd = 0.0;
        for s in 0..8 {
            let e: [f64; 3] = [0, 1, 2].map(|b| if s >> b & 1 == 1 { h } else { -h });
            let sign: f64 = e.iter().map(|v| v.signum()).product();
            fd += sign * at(e);
        }
        fd /= 8.0 * h * h * h;
        assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }

    #[test]
    fn second_order_source_for_the_cubic_layer() {
        // With only first-order data, the order-2 term is the second
        // linearization source (n-1)/(2c) d_n^3 c v_l v_a.
        for dim in [3, 4] {
            let c = ScenarioSpec::new("bump-cubic", dim).with_alpha(3.0).build().unwrap();
            let xp = [0.1, 0.2, -0.1];
            let xp = &xp[..dim - 1];
            let t = taylor_data(&c, xp, 2);
            let mut jet = MultilinearJet::zero(2);
            jet.u.set(1, 0.6);
            jet.u.set(2, -1.3);
            let f = eval_f_multilinear(dim, &t, &jet).unwrap();
            let expected = (dim as f64 - 1.0) / (2.0 * t[0].0) * t[3].0 * 0.6 * -1.3;
            assert!((f.top() - expected).abs() < 1e-13 * expected.abs().max(1.0));
        }
    }
}
