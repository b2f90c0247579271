//! Randomized structural properties of the copula catalogue.

use proptest::prelude::*;
use xirho::copula::{BoundaryCopula, Clayton, Copula, Frank, GaussianCopula, Gumbel, Shuffled};

fn models(param: f64, slope: f64) -> Vec<Box<dyn Copula>> {
    vec![
        Box::new(BoundaryCopula::new(slope)),
        Box::new(GaussianCopula::new(param * 1.8 - 0.9)),
        Box::new(Clayton::new(0.2 + 6.0 * param)),
        Box::new(Frank::new(0.5 + 9.0 * param)),
        Box::new(Gumbel::new(1.0 + 3.0 * param)),
        Box::new(Shuffled::new(BoundaryCopula::new(slope), param)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frechet_bounds_hold(
        u in 0.0..1.0f64,
        v in 0.0..1.0f64,
        param in 0.01..0.99f64,
        slope in -4.0..4.0f64,
    ) {
        prop_assume!(slope.abs() > 0.05);
        for model in models(param, slope) {
            let c = model.cdf(u, v);
            prop_assert!(c >= (u + v - 1.0).max(0.0) - 1e-9);
            prop_assert!(c <= u.min(v) + 1e-9);
        }
    }

    #[test]
    fn margins_are_uniform(
        t in 0.0..1.0f64,
        param in 0.01..0.99f64,
        slope in -4.0..4.0f64,
    ) {
        prop_assume!(slope.abs() > 0.05);
        for model in models(param, slope) {
            prop_assert!((model.cdf(t, 1.0) - t).abs() <= 1e-9);
            prop_assert!((model.cdf(1.0, t) - t).abs() <= 1e-9);
            prop_assert!(model.cdf(t, 0.0).abs() <= 1e-12);
            prop_assert!(model.cdf(0.0, t).abs() <= 1e-12);
        }
    }

    #[test]
    fn rectangles_carry_nonnegative_mass(
        u1 in 0.0..1.0f64,
        u2 in 0.0..1.0f64,
        v1 in 0.0..1.0f64,
        v2 in 0.0..1.0f64,
        param in 0.01..0.99f64,
        slope in -4.0..4.0f64,
    ) {
        prop_assume!(slope.abs() > 0.05);
        let (a, b) = (u1.min(u2), u1.max(u2));
        let (c, d) = (v1.min(v2), v1.max(v2));
        for model in models(param, slope) {
            let mass = model.cdf(b, d) - model.cdf(a, d) - model.cdf(b, c) + model.cdf(a, c);
            prop_assert!(mass >= -1e-9, "negative rectangle mass {mass}");
        }
    }

    #[test]
    fn conditional_quantile_inverts_d1(
        t in 0.01..0.99f64,
        w in 0.01..0.99f64,
        slope in 0.1..4.0f64,
    ) {
        let model = BoundaryCopula::new(slope);
        let v = model.conditional_quantile(t, w).unwrap();
        // d1 is a step-free cdf in v here, so the quantile must bracket w.
        prop_assert!(model.d1(t, (v - 1e-6).max(0.0)) <= w + 1e-3);
        prop_assert!(model.d1(t, (v + 1e-6).min(1.0)) >= w - 1e-3);
    }
}
