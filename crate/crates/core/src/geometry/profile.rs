use serde::{Deserialize, Serialize};

/// Largest supported base dimension `d = n - 1`.
pub const MAX_BASE_DIM: usize = 3;

/// Multi-index over the base coordinates `x'`.
pub type MultiIndex = [u32; MAX_BASE_DIM];

/// Smooth functions of the base coordinates `x'` with exact derivatives of
/// every order. These are the building blocks of the conformal factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    Constant { value: f64 },
    Bump(Bump),
    /// `amplitude * exp(rate . x')`.
    Exponential { amplitude: f64, rate: Vec<f64> },
    Sum { terms: Vec<Profile> },
    Product { factors: Vec<Profile> },
}

/// Where the gradient of a profile can be non-zero.
#[derive(Debug, Clone, PartialEq)]
pub enum GradientSupport {
    /// The profile is constant.
    Empty,
    Ball { center: Vec<f64>, radius: f64 },
    Unbounded,
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn exponential(amplitude: f64, rate: &[f64]) -> Self {
        Profile::Exponential {
            amplitude,
            rate: rate.to_vec(),
        }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.derivative(y, &[0; MAX_BASE_DIM])
    }

    /// Exact partial derivative `d^alpha` at `y`.
    pub fn derivative(&self, y: &[f64], alpha: &MultiIndex) -> f64 {
        match self {
            Profile::Constant { value } => {
                if alpha.iter().all(|&a| a == 0) {
                    *value
                } else {
                    0.0
                }
            }
            Profile::Bump(b) => b.derivative(y, alpha),
            Profile::Exponential { amplitude, rate } => {
                let mut arg = 0.0;
                let mut scale = *amplitude;
                for (i, &r) in rate.iter().enumerate() {
                    arg += r * y[i];
                    scale *= r.powi(alpha[i] as i32);
                }
                for i in rate.len()..MAX_BASE_DIM {
                    if alpha[i] > 0 {
                        return 0.0;
                    }
                }
                scale * arg.exp()
            }
            Profile::Sum { terms } => terms.iter().map(|t| t.derivative(y, alpha)).sum(),
            Profile::Product { factors } => product_derivative(factors, y, alpha),
        }
    }

    pub fn gradient_support(&self) -> GradientSupport {
        match self {
            Profile::Constant { .. } => GradientSupport::Empty,
            Profile::Bump(b) => GradientSupport::Ball {
                center: b.center.clone(),
                radius: b.radius,
            },
            Profile::Exponential { rate, .. } => {
                if rate.iter().all(|&r| r == 0.0) {
                    GradientSupport::Empty
                } else {
                    GradientSupport::Unbounded
                }
            }
            Profile::Sum { terms } => union_support(terms.iter().map(|t| t.gradient_support())),
            Profile::Product { factors } => {
                union_support(factors.iter().map(|t| t.gradient_support()))
            }
        }
    }

    /// Highest derivative order for which the profile is continuous.
    pub fn smoothness(&self) -> u32 {
        match self {
            Profile::Constant { .. } | Profile::Exponential { .. } => u32::MAX,
            Profile::Bump(b) => b.power.saturating_sub(1),
            Profile::Sum { terms } => terms.iter().map(|t| t.smoothness()).min().unwrap_or(u32::MAX),
            Profile::Product { factors } => {
                factors.iter().map(|t| t.smoothness()).min().unwrap_or(u32::MAX)
            }
        }
    }
}

fn union_support(parts: impl Iterator<Item = GradientSupport>) -> GradientSupport {
    let mut balls: Vec<(Vec<f64>, f64)> = Vec::new();
    for p in parts {
        match p {
            GradientSupport::Empty => {}
            GradientSupport::Unbounded => return GradientSupport::Unbounded,
            GradientSupport::Ball { center, radius } => balls.push((center, radius)),
        }
    }
    match balls.len() {
        0 => GradientSupport::Empty,
        1 => {
            let (center, radius) = balls.pop().unwrap();
            GradientSupport::Ball { center, radius }
        }
        _ => {
            // Enclosing ball centred at the mean of the centres.
            let dim = balls[0].0.len();
            let mut center = vec![0.0; dim];
            for (c, _) in &balls {
                for i in 0..dim {
                    center[i] += c[i] / balls.len() as f64;
                }
            }
            let radius = balls
                .iter()
                .map(|(c, r)| {
                    let d: f64 = c.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
                    d.sqrt() + r
                })
                .fold(0.0, f64::max);
            GradientSupport::Ball { center, radius }
        }
    }
}

fn product_derivative(factors: &[Profile], y: &[f64], alpha: &MultiIndex) -> f64 {
    match factors {
        [] => {
            if alpha.iter().all(|&a| a == 0) {
                1.0
            } else {
                0.0
            }
        }
        [only] => only.derivative(y, alpha),
        [first, rest @ ..] => {
            // Leibniz rule over all beta <= alpha.
            let mut total = 0.0;
            for_each_sub_index(alpha, |beta| {
                let gamma = sub(alpha, beta);
                let a = first.derivative(y, beta);
                if a == 0.0 {
                    return;
                }
                total += multi_binomial(alpha, beta) * a * product_derivative(rest, y, &gamma);
            });
            total
        }
    }
}

fn sub(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn for_each_sub_index(alpha: &MultiIndex, mut f: impl FnMut(&MultiIndex)) {
    for b0 in 0..=alpha[0] {
        for b1 in 0..=alpha[1] {
            for b2 in 0..=alpha[2] {
                f(&[b0, b1, b2]);
            }
        }
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

fn multi_binomial(alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
    (0..MAX_BASE_DIM).map(|i| binomial(alpha[i], beta[i])).product()
}

/// Falling factorial `p (p-1) ... (p-k+1)`.
pub(crate) fn falling(p: u32, k: u32) -> f64 {
    if k > p {
        return 0.0;
    }
    (0..k).map(|i| (p - i) as f64).product()
}

/// Polynomial bump `amplitude * (1 - |x' - center|^2 / radius^2)^power`
/// inside the ball and zero outside. It is `C^{power-1}`, and its derivatives
/// are evaluated exactly from the expanded polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BumpSpec", into = "BumpSpec")]
pub struct Bump {
    center: Vec<f64>,
    radius: f64,
    power: u32,
    amplitude: f64,
    /// Expanded monomials `coef * prod_i y_i^{e_i}` in `y = x' - center`.
    terms: Vec<(f64, MultiIndex)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BumpSpec {
    center: Vec<f64>,
    radius: f64,
    power: u32,
    amplitude: f64,
}

impl TryFrom<BumpSpec> for Bump {
    type Error = String;
    fn try_from(s: BumpSpec) -> std::result::Result<Self, String> {
        Bump::new(&s.center, s.radius, s.power, s.amplitude).map_err(|e| e.to_string())
    }
}

impl From<Bump> for BumpSpec {
    fn from(b: Bump) -> Self {
        BumpSpec {
            center: b.center,
            radius: b.radius,
            power: b.power,
            amplitude: b.amplitude,
        }
    }
}

impl Bump {
    pub fn new(center: &[f64], radius: f64, power: u32, amplitude: f64) -> crate::Result<Self> {
        if center.is_empty() || center.len() > MAX_BASE_DIM {
            return crate::error::config(format!("bump centre must have 1..=3 components, got {}", center.len()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return crate::error::config("bump radius must be positive");
        }
        if power < 2 {
            return crate::error::config("bump power must be at least 2");
        }
        let dim = center.len();
        let mut terms: Vec<(f64, MultiIndex)> = Vec::new();
        // (1 - s)^k with s = sum z_i^2, z = y / r.
        for j in 0..=power {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let outer = amplitude * binomial(power, j) * sign / radius.powi(2 * j as i32);
            for_each_composition(j, dim, |beta| {
                let mut coef = outer * factorial(j);
                let mut e = [0u32; MAX_BASE_DIM];
                for i in 0..dim {
                    coef /= factorial(beta[i]);
                    e[i] = 2 * beta[i];
                }
                terms.push((coef, e));
            });
        }
        Ok(Bump {
            center: center.to_vec(),
            radius,
            power,
            amplitude,
            terms,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn shifted(&self, x: &[f64]) -> ([f64; MAX_BASE_DIM], f64) {
        let mut y = [0.0; MAX_BASE_DIM];
        let mut r2 = 0.0;
        for i in 0..self.center.len() {
            y[i] = x[i] - self.center[i];
            r2 += y[i] * y[i];
        }
        (y, r2)
    }

    pub fn derivative(&self, x: &[f64], alpha: &MultiIndex) -> f64 {
        let dim = self.center.len();
        if alpha[dim..].iter().any(|&a| a > 0) {
            return 0.0;
        }
        let (y, r2) = self.shifted(x);
        let rr = self.radius * self.radius;
        if r2 >= rr {
            return 0.0;
        }
        if alpha.iter().all(|&a| a == 0) {
            return self.amplitude * (1.0 - r2 / rr).powi(self.power as i32);
        }
        let mut total = 0.0;
        for (coef, e) in &self.terms {
            let mut t = *coef;
            for i in 0..dim {
                if alpha[i] > e[i] {
                    t = 0.0;
                    break;
                }
                t *= falling(e[i], alpha[i]) * y[i].powi((e[i] - alpha[i]) as i32);
            }
            total += t;
        }
        total
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Calls `f` for every `beta` with `|beta| = total` over `dim` slots.
fn for_each_composition(total: u32, dim: usize, mut f: impl FnMut(&[u32; MAX_BASE_DIM])) {
    let mut beta = [0u32; MAX_BASE_DIM];
    fn rec(
        slot: usize,
        left: u32,
        dim: usize,
        beta: &mut [u32; MAX_BASE_DIM],
        f: &mut dyn FnMut(&[u32; MAX_BASE_DIM]),
    ) {
        if slot + 1 == dim {
            beta[slot] = left;
            f(beta);
            return;
        }
        for k in 0..=left {
            beta[slot] = k;
            rec(slot + 1, left - k, dim, beta, f);
        }
    }
    rec(0, total, dim, &mut beta, &mut f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd(p: &Profile, x: &[f64], axis: usize, alpha: &MultiIndex) -> f64 {
        let h = 1e-5;
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[axis] += h;
        xm[axis] -= h;
        (p.derivative(&xp, alpha) - p.derivative(&xm, alpha)) / (2.0 * h)
    }

    #[test]
    fn bump_value_matches_closed_form() {
        let b = Profile::Bump(Bump::new(&[0.1, -0.2], 0.7, 6, 1.5).unwrap());
        let x = [0.3, 0.1];
        let r2: f64 = 0.2f64.powi(2) + 0.3f64.powi(2);
        let expect = 1.5 * (1.0 - r2 / 0.49).powi(6);
        assert_relative_eq!(b.value(&x), expect, max_relative = 1e-14);
        assert_eq!(b.value(&[1.0, 1.0]), 0.0);
    }

    #[test]
    fn bump_polynomial_value_agrees_with_direct_formula() {
        let b = Bump::new(&[0.1, -0.2, 0.05], 0.8, 8, 1.0).unwrap();
        let x = [0.2, 0.1, -0.3];
        let (y, _) = b.shifted(&x);
        let poly: f64 = b
            .terms
            .iter()
            .map(|(c, e)| c * (0..3).map(|i| y[i].powi(e[i] as i32)).product::<f64>())
            .sum();
        assert_relative_eq!(poly, b.derivative(&x, &[0, 0, 0]), max_relative = 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let profiles = vec![
            Profile::Bump(Bump::new(&[0.1, -0.2], 0.9, 8, 1.0).unwrap()),
            Profile::exponential(0.7, &[0.4, -0.3]),
            Profile::Product {
                factors: vec![
                    Profile::Bump(Bump::new(&[0.0, 0.1], 1.1, 8, 1.0).unwrap()),
                    Profile::exponential(1.0, &[0.5, 0.2]),
                    Profile::Sum {
                        terms: vec![Profile::constant(1.0), Profile::exponential(0.3, &[-0.1, 0.6])],
                    },
                ],
            },
        ];
        let x = [0.23, -0.17];
        let alphas: [MultiIndex; 5] = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [2, 1, 0], [0, 3, 0]];
        for p in &profiles {
            for a in &alphas {
                for axis in 0..2 {
                    let mut higher = *a;
                    higher[axis] += 1;
                    let exact = p.derivative(&x, &higher);
                    let approx = fd(p, &x, axis, a);
                    assert!(
                        (exact - approx).abs() < 1e-6 * (1.0 + exact.abs()),
                        "{p:?} {higher:?}: {exact} vs {approx}"
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_support_of_sum_encloses_both_balls() {
        let p = Profile::Sum {
            terms: vec![
                Profile::Bump(Bump::new(&[0.5, 0.0], 0.2, 4, 1.0).unwrap()),
                Profile::Bump(Bump::new(&[-0.5, 0.0], 0.3, 4, 1.0).unwrap()),
                Profile::constant(2.0),
            ],
        };
        match p.gradient_support() {
            GradientSupport::Ball { center, radius } => {
                assert_relative_eq!(center[0], 0.0);
                assert_relative_eq!(radius, 0.8, epsilon = 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bump_serde_roundtrip_rebuilds_terms() {
        let b = Profile::Bump(Bump::new(&[0.1, 0.2], 0.5, 6, 2.0).unwrap());
        let s = serde_json::to_string(&b).unwrap();
        let back: Profile = serde_json::from_str(&s).unwrap();
        assert_eq!(b, back);
    }
}
