use proptest::prelude::*;

use wsquad::periodic::periodic_weights;
use wsquad::planar::{planar_weights, NearPolicy};
use wsquad::quad::{gauss_panel_integrate, oracle_integrate, OracleOptions, Rect};
use wsquad::SummationPolicy;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summation_policies_agree(values in prop::collection::vec(-1e3f64..1e3, 0..500)) {
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        let a = SummationPolicy::PairwiseDeterministic.sum(&values);
        let b = SummationPolicy::SequentialCompensated.sum(&values);
        prop_assert!((a - b).abs() <= 1e-13 * scale);
    }

    #[test]
    fn compensated_sum_ignores_order(mut values in prop::collection::vec(-1e6f64..1e6, 1..300)) {
        let a = SummationPolicy::SequentialCompensated.sum(&values);
        values.reverse();
        let b = SummationPolicy::SequentialCompensated.sum(&values);
        let scale: f64 = values.iter().map(|v| v.abs()).sum();
        prop_assert!((a - b).abs() <= 1e-15 * scale);
    }

    #[test]
    fn periodic_weights_positive_and_shift_covariant(
        n in 4usize..20,
        lambda in 0.05f64..0.9,
        i in 0usize..20,
        j in 0usize..20,
    ) {
        let (i, j) = (i % n, j % n);
        let a = periodic_weights(n, lambda, i, j).unwrap();
        let b = periodic_weights(n, lambda, (i + 1) % n, (j + 3) % n).unwrap();
        for k in 0..n {
            for l in 0..n {
                let w = a.weight(k, l);
                prop_assert!(w > 0.0);
                prop_assert_eq!(w, b.weight((k + 1) % n, (l + 3) % n));
                // Point symmetry about the evaluation cell.
                let mirror = a.weight((2 * i + n - k) % n, (2 * j + n - l) % n);
                prop_assert!((w - mirror).abs() <= 1e-14 * w);
            }
        }
    }

    #[test]
    fn planar_weights_nonnegative_with_positive_home(
        n in 4usize..16,
        lambda in 0.1f64..0.8,
        t1 in -1.0f64..1.0,
        t2 in -1.0f64..1.0,
    ) {
        for policy in [NearPolicy::PerCell, NearPolicy::MergedDelta] {
            let w = planar_weights(n, (t1, t2), lambda, 1.0, policy).unwrap();
            prop_assert!(w.weights.iter().all(|&v| v >= 0.0 && v.is_finite()));
            prop_assert!(w.weight(w.home.0, w.home.1) > 0.0);
        }
    }

    #[test]
    fn oracle_is_additive(
        split in 0.1f64..0.9,
        c in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let f = |x: f64, y: f64| c[0] + c[1] * x * y + c[2] * (3.0 * x).sin() + c[3] * (x * x + y).exp();
        let whole = Rect::new(0.0, 1.0, -1.0, 0.5);
        let xs = split;
        let left = Rect::new(0.0, xs, -1.0, 0.5);
        let right = Rect::new(xs, 1.0, -1.0, 0.5);
        let opts = OracleOptions::default();
        let w = oracle_integrate(f, &whole, 1e-11, opts).unwrap();
        let l = oracle_integrate(f, &left, 1e-11, opts).unwrap();
        let r = oracle_integrate(f, &right, 1e-11, opts).unwrap();
        prop_assert!(w.converged && l.converged && r.converged);
        prop_assert!((w.estimate - (l.estimate + r.estimate)).abs() < 1e-9);
    }
}

#[test]
fn planar_weights_integrate_the_kernel() {
    // Σ J_kl ≈ ∫∫ |τ - t|^{-2λ}; the near block carries a small regularisation bias.
    let lambda = 0.4;
    for t in [(0.0, 0.0), (0.3, -0.55), (-0.9, 0.2)] {
        let exact = oracle_integrate(
            |x, y| ((x - t.0).powi(2) + (y - t.1).powi(2)).powf(-lambda),
            &Rect::new(-1.0, 1.0, -1.0, 1.0),
            1e-9,
            OracleOptions::singular_at(t.0, t.1),
        )
        .unwrap();
        assert!(exact.converged);
        let exact = exact.estimate;
        for policy in [NearPolicy::PerCell, NearPolicy::MergedDelta] {
            let total = planar_weights(16, t, lambda, 1.0, policy).unwrap().total(SummationPolicy::default());
            assert!((total / exact - 1.0).abs() < 1e-3, "t = {t:?}: {total} vs {exact}");
        }
    }
}

#[test]
fn gauss_panel_is_exact_for_polynomials() {
    let rect = Rect::new(-0.5, 2.0, 1.0, 1.5);
    // Degree 2m-1 per axis is exact for m points.
    let got = gauss_panel_integrate(|x, y| x.powi(7) * y.powi(5), &rect, 4).unwrap();
    let want = (2f64.powi(8) - 0.5f64.powi(8)) / 8.0 * (1.5f64.powi(6) - 1.0) / 6.0;
    assert!((got - want).abs() < 1e-12 * want.abs());
}
