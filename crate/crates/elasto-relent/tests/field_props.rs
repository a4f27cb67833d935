//! Property tests for the spectral field calculus.

mod common;

use proptest::prelude::*;

use elasto_relent::TorusField;

fn values_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds(values in values_strategy(64)) {
        let w = TorusField::new(values).unwrap();
        let l2_sq = w.l2_norm().powi(2);
        let spectral = w.spectrum().l2_norm_sq();
        prop_assert!((l2_sq - spectral).abs() <= 1e-12 * l2_sq.max(1e-30));
    }

    #[test]
    fn round_trip_is_identity(values in values_strategy(64)) {
        let w = TorusField::new(values).unwrap();
        let back = w.spectrum().to_field();
        let err = (&w - &back).linf_norm();
        prop_assert!(err <= 1e-12 * w.linf_norm().max(1.0));
    }

    #[test]
    fn spectrum_is_hermitian(values in values_strategy(64)) {
        let sp = TorusField::new(values).unwrap().spectrum();
        for k in 1..32i64 {
            let a = sp.coeff(k);
            let b = sp.coeff(-k);
            prop_assert_eq!(a.re, b.re);
            prop_assert_eq!(a.im, -b.im);
        }
    }

    #[test]
    fn mean_projection_is_an_idempotent_linear_projection(
        a in values_strategy(64),
        b in values_strategy(64),
        c in -10.0f64..10.0,
    ) {
        let wa = TorusField::new(a).unwrap();
        let wb = TorusField::new(b).unwrap();
        let pa = wa.project_mean_zero();

        // idempotent
        let ppa = pa.project_mean_zero();
        prop_assert!((&ppa - &pa).linf_norm() <= 1e-13 * pa.linf_norm().max(1.0));
        prop_assert!(pa.mean().abs() <= 1e-13);

        // linear: P(c a + b) == c P(a) + P(b)
        let combo = &wa.scale(c) + &wb;
        let lhs = combo.project_mean_zero();
        let rhs = &pa.scale(c) + &wb.project_mean_zero();
        let scale = lhs.linf_norm().max(1.0);
        prop_assert!((&lhs - &rhs).linf_norm() <= 1e-12 * scale);
    }

    #[test]
    fn derivatives_compose_on_band_limited_fields(
        amps in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 8)
    ) {
        // modes 1..=8 over n = 64 keep everything inside |k| <= n/3
        let modes: Vec<(f64, f64, f64)> = amps
            .iter()
            .enumerate()
            .map(|(i, &(s, c))| ((i + 1) as f64, s, c))
            .collect();
        let w = TorusField::from_fn(64, |x| {
            modes
                .iter()
                .map(|&(k, s, c)| {
                    let arg = 2.0 * std::f64::consts::PI * k * x;
                    s * arg.sin() + c * arg.cos()
                })
                .sum()
        })
        .unwrap();
        let twice = w.derivative(1).unwrap().derivative(1).unwrap();
        let second = w.derivative(2).unwrap();
        let scale = second.l2_norm().max(1e-12);
        prop_assert!((&twice - &second).l2_norm() <= 1e-10 * scale);
    }
}
