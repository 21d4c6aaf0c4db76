use num_complex::Complex64;
use proptest::prelude::*;
use radnorm::dsl::{parse, print, Expr};
use radnorm::{
    build_schedule, fit_loglog, kernel_envelope, mixed_norm, rm_norm, AnnulusArc, DiscFunction, DiscPoint,
    ExponentPair, QuadratureConfig,
};

fn exponent() -> impl Strategy<Value = f64> {
    1.05f64..8.0
}

fn point() -> impl Strategy<Value = DiscPoint> {
    (1e-9f64..1.0, -7.0f64..7.0).prop_map(|(x, t)| DiscPoint::new(x, t).unwrap())
}

fn function() -> impl Strategy<Value = DiscFunction> {
    prop_oneof![
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..6)
            .prop_map(|c| DiscFunction::polynomial(c.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())),
        (0.0f64..0.999, 0.0f64..6.3, 0.1f64..4.0)
            .prop_map(|(r, t, b)| DiscFunction::pole_kernel(Complex64::from_polar(r, t), b).unwrap()),
        (1e-8f64..0.4, 1.1f64..3.0, 0.0f64..6.3).prop_map(|(d, s, phi)| DiscFunction::pole_shift(d, s, phi).unwrap()),
    ]
}

fn arc() -> impl Strategy<Value = AnnulusArc> {
    (1e-6f64..0.5, 0.0f64..0.5, -4.0f64..4.0, 1e-4f64..3.0)
        .prop_map(|(x, w, c, h)| AnnulusArc::centered(x, x + w, c, h).unwrap())
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        (0.0f64..1e6).prop_map(Expr::Number),
        (0u32..40).prop_map(Expr::Pow),
        (0.0f64..1.0, 0.001f64..10.0).prop_map(|(a, b)| Expr::Kernel { a, b }),
        (1e-12f64..0.5, 1.001f64..9.0, 1.001f64..9.0, 0.0f64..7.0)
            .prop_map(|(delta, p, q, phi)| Expr::UShift { delta, p, q, phi }),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (0.0f64..100.0, inner).prop_map(|(c, x)| Expr::Mul(c, Box::new(x))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn homogeneity(f in function(), z in point(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let c = Complex64::new(re, im);
        let lhs = DiscFunction::scale(c, f.clone()).evaluate_abs(&z);
        let rhs = c.norm() * f.evaluate_abs(&z);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn mask_partition(f in function(), a in arc(), z in point()) {
        let inside = DiscFunction::masked(f.clone(), a, true).evaluate_abs(&z);
        let outside = DiscFunction::masked(f.clone(), a, false).evaluate_abs(&z);
        prop_assert!(inside == 0.0 || outside == 0.0);
        prop_assert_eq!(inside + outside, f.evaluate_abs(&z));
    }

    #[test]
    fn rotation_composes(f in function(), z in point(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
        let twice = f.rotate(a).rotate(b).evaluate_abs(&z);
        let once = f.rotate(a + b).evaluate_abs(&z);
        prop_assert!((twice - once).abs() <= 1e-9 * once.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn rotation_moves_points(f in function(), z in point(), phi in -4.0f64..4.0) {
        let moved = DiscPoint::new(z.one_minus_r(), z.theta() + phi).unwrap();
        let lhs = f.rotate(phi).evaluate_abs(&moved);
        let rhs = f.evaluate_abs(&z);
        prop_assert!((lhs - rhs).abs() <= 1e-7 * rhs.max(f64::MIN_POSITIVE), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn conjugate_is_involution(p in exponent(), q in exponent()) {
        let e = ExponentPair::new(p, q).unwrap();
        let back = e.conjugate().conjugate();
        prop_assert!((back.p() - p).abs() <= 1e-12 * p);
        prop_assert!((back.q() - q).abs() <= 1e-12 * q);
    }

    #[test]
    fn parser_round_trip(e in expr()) {
        let text = print(&e);
        prop_assert_eq!(parse(&text).unwrap(), e);
    }

    #[test]
    fn parser_is_total(s in "\\PC{0,40}") {
        if let Err(err) = parse(&s) {
            prop_assert!(err.offset() <= s.len());
        }
    }

    #[test]
    fn parser_is_total_near_grammar(s in "[zKU^+\\-(),;.0-9e ]{0,40}") {
        if let Err(err) = parse(&s) {
            prop_assert!(err.offset() <= s.len());
        }
    }

    #[test]
    fn envelope_sandwich(alpha in 0.5f64..0.999_999, x in 1e-9f64..0.5, theta in 1e-9f64..0.5) {
        prop_assume!(x < 0.5 && theta < 0.5);
        let (lo, hi) = kernel_envelope(alpha, x, theta).unwrap();
        let r = 1.0 - x;
        // |1 - a r e^{it}|^2 = (1 - a r)^2 + 4 a r sin^2(t / 2)
        let s = (theta / 2.0).sin();
        let truth = ((1.0 - alpha) + alpha * x).powi(2) + 4.0 * alpha * r * s * s;
        prop_assert!(lo <= truth && truth <= hi, "{} <= {} <= {}", lo, truth, hi);
    }

    #[test]
    fn loglog_fit_is_exact_on_power_laws(slope in -4.0f64..4.0, c in 0.01f64..100.0, n in 3usize..12) {
        let pts: Vec<(f64, f64)> = (0..n).map(|i| {
            let x = 10f64.powf(-(i as f64) / 2.0);
            (x, c * x.powf(slope))
        }).collect();
        let fit = fit_loglog(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-12);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
        prop_assert!(fit.residual_max < 1e-9);
    }

    #[test]
    fn loglog_slope_ignores_scaling(ys in prop::collection::vec(0.1f64..10.0, 4..10), c in 1e-3f64..1e3) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y)).collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, c * y)).collect();
        let a = fit_loglog(&pts).unwrap();
        let b = fit_loglog(&scaled).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        prop_assert!((a.residual_max - b.residual_max).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn schedule_constraints(q in 1.05f64..3.0, gap in 0.1f64..4.0, m in 1usize..7) {
        let e = ExponentPair::new(q + gap, q).unwrap();
        if let Ok(s) = build_schedule(e, m) {
            prop_assert!(s.check_constraints().is_ok());
            for i in 1..=m {
                for j in (i + 1)..=m {
                    prop_assert!(s.region(i).unwrap().is_disjoint(&s.region(j).unwrap()));
                }
            }
        }
    }

    #[test]
    fn monomial_norms_closed_form(k in 0usize..=20, p in exponent(), q in exponent()) {
        let e = ExponentPair::new(p, q).unwrap();
        let f = DiscFunction::monomial(k);
        let exact = (k as f64 * p + 1.0).powf(-1.0 / p);
        let cfg = QuadratureConfig::default();
        let rho = rm_norm(&f, e, &cfg).unwrap();
        let mixed = mixed_norm(&f, e, &cfg).unwrap();
        prop_assert!((rho.value - exact).abs() <= 1e-9 * exact);
        prop_assert!((mixed.value - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn norm_homogeneity(re in -3.0f64..3.0, im in -3.0f64..3.0, alpha in 0.0f64..0.95, p in exponent(), q in exponent()) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        let e = ExponentPair::new(p, q).unwrap();
        let k = DiscFunction::pole_kernel(alpha, 1.5).unwrap();
        let cfg = QuadratureConfig::default();
        let a = rm_norm(&DiscFunction::scale(c, k.clone()), e, &cfg).unwrap();
        let b = rm_norm(&k, e, &cfg).unwrap();
        prop_assert!((a.value - c.norm() * b.value).abs() <= a.error_estimate + c.norm() * b.error_estimate + 1e-14 * a.value);
    }

    #[test]
    fn norm_rotation_invariance(phi in -4.0f64..4.0, alpha in 0.0f64..0.99, p in exponent(), q in exponent()) {
        let e = ExponentPair::new(p, q).unwrap();
        let k = DiscFunction::pole_kernel(alpha, 1.5).unwrap();
        let cfg = QuadratureConfig::default();
        let a = mixed_norm(&k.rotate(phi), e, &cfg).unwrap();
        let b = mixed_norm(&k, e, &cfg).unwrap();
        prop_assert!((a.value - b.value).abs() <= a.error_estimate + b.error_estimate + 1e-13 * b.value,
            "{} vs {} (+- {}, {})", a.value, b.value, a.error_estimate, b.error_estimate);
    }
}
