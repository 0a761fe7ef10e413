use minsurf_core::cgo::{bilinear, make_zeta_pair};
use minsurf_core::geometry::{
    catalog, christoffel, divergence_form, eval_f, implicit_form, ConformalFactor, JetPoint, CATALOG_IDS,
};
use minsurf_core::pipeline::{relative_defect, AnalyticGraph};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn factor(idx: usize, n: usize) -> ConformalFactor {
    catalog(n)[idx].build().unwrap()
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(-0.9..0.9f64, n - 1), -0.2..0.2f64).prop_map(|(mut x, xn)| {
        x.push(xn);
        x
    })
}

fn scenario() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (0..CATALOG_IDS.len(), 3usize..=4).prop_flat_map(|(i, n)| (Just(i), Just(n), point(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Symmetric in the lower indices and equal to the metric formula with
    /// central differences of `c`.
    #[test]
    fn christoffel_symbols_match_the_metric((idx, n, x) in scenario()) {
        let c = factor(idx, n);
        let g = christoffel(&c, &x).unwrap();
        let h = 1e-5;
        let dc: Vec<f64> = (0..n)
            .map(|a| {
                let (mut p, mut m) = (x.clone(), x.clone());
                p[a] += h;
                m[a] -= h;
                (c.value(&p) - c.value(&m)) / (2.0 * h)
            })
            .collect();
        let cv = c.value(&x);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(g.get(m, i, j), g.get(m, j, i));
                    let oracle = (dc[i] * delta(j, m) + dc[j] * delta(i, m) - dc[m] * delta(i, j)) / (2.0 * cv);
                    prop_assert!((g.get(m, i, j) - oracle).abs() < 1e-7, "{} vs {}", g.get(m, i, j), oracle);
                }
            }
        }
    }

    #[test]
    fn residual_forms_agree_on_analytic_graphs(idx in 0..CATALOG_IDS.len(), n in 3usize..=4, seed in any::<u64>(),
                                               x in prop::collection::vec(-0.9..0.9f64, 3)) {
        let c = factor(idx, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = AnalyticGraph::random(n - 1, &mut rng);
        let jet = graph.jet(&x[..n - 1]);
        prop_assert!(relative_defect(&c, &jet).unwrap() <= 1e-10);
        let f = eval_f(&c, &jet).unwrap();
        let div = divergence_form(&c, &jet, jet.flux_divergence()).unwrap();
        prop_assert!((f - jet.w().sqrt() * div).abs() <= 1e-10 * f.abs().max(1.0));
        if f.abs() > 1e-8 && div.abs() > 1e-8 {
            prop_assert_eq!(f.signum(), div.signum());
        }
        let im = implicit_form(&c, &jet).unwrap();
        prop_assert!(im * f >= 0.0 || im.abs().max(f.abs()) < 1e-12);
    }

    #[test]
    fn zeta_pairs_are_null_and_sum_to_i_h_xi(xi in prop::collection::vec(-20.0..20.0f64, 2..=3), frac in 0.001..0.999f64) {
        let len = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(len > 1e-6);
        let h = 2.0 * frac / len;
        let p = make_zeta_pair(&xi, h, None).unwrap();
        prop_assert!(p.defect() <= 1e-14, "{}", p.defect());
        prop_assert!(bilinear(&p.zeta1, &p.zeta1).norm() <= 1e-14);
        for ((a, b), x) in p.zeta1.iter().zip(&p.zeta2).zip(&xi) {
            prop_assert!((a + b - Complex64::new(0.0, h * x)).norm() <= 1e-14);
        }
    }
}

#[test]
fn zeta_pairs_reject_large_h() {
    assert!(make_zeta_pair(&[1.0, 0.0, 0.0], 2.5, None).is_err());
}

#[test]
fn jet_points_reject_mismatched_dimensions() {
    assert!(JetPoint::new(&[0.0, 0.0], 0.0, &[0.0], &[&[0.0, 0.0], &[0.0, 0.0]]).is_err());
}
