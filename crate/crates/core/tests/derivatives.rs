use pmtk_core::geometry::{derivative_check, frame, DerivativeCheckConfig};
use pmtk_core::metric::{
    make_conformal_superposition, make_flat, make_half_schwarzschild, make_perturbed_flat, Bubble,
    ConformalBubbleSpec, MetricField, Scaled,
};
use pmtk_core::Jet;
use proptest::prelude::*;

fn zoo() -> Vec<Box<dyn MetricField>> {
    let two = |core: f64| {
        let b = |c: [f64; 3]| if core > 0.0 { Bubble::smoothed(1.0, c, core) } else { Bubble::point(1.0, c) };
        make_conformal_superposition(ConformalBubbleSpec {
            bubbles: vec![b([-2.0, 0.0, 0.0]), b([2.0, 0.0, 0.0])],
            mirror: true,
        })
        .unwrap()
    };
    vec![
        Box::new(make_flat()),
        Box::new(make_half_schwarzschild(1.0).unwrap()),
        Box::new(two(0.0)),
        Box::new(two(1.0)),
        Box::new(make_perturbed_flat(0.05, 0.8, 7).unwrap()),
        Box::new(Scaled::new(make_half_schwarzschild(1.0).unwrap(), 2.0)),
    ]
}

#[test]
fn partials_converge_at_second_order() {
    let config = DerivativeCheckConfig::default();
    for g in zoo() {
        let r = derivative_check(g.as_ref(), &config).unwrap();
        assert_eq!(r.points, 1000);
        assert!(r.passes(1.9, 1e-10), "{}: {r:?}", g.name());
    }
}

#[test]
fn flat_differences_are_exact() {
    let r = derivative_check(&make_flat(), &DerivativeCheckConfig::default()).unwrap();
    assert_eq!(r.first, [0.0, 0.0]);
    assert_eq!(r.second, [0.0, 0.0]);
    assert!(r.first_order.at_least(f64::INFINITY));
}

proptest! {
    #[test]
    fn conformal_frame_invariants(
        m in 0.1f64..3.0,
        x0 in -6.0f64..6.0,
        x1 in -6.0f64..6.0,
        x2 in 0.0f64..6.0,
    ) {
        let g = make_half_schwarzschild(m).unwrap();
        let x = [x0, x1, x2];
        prop_assume!((x0 * x0 + x1 * x1 + x2 * x2).sqrt() > m);
        let f = frame(&g, x).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(f.gamma.0[k][i][j], f.gamma.0[k][j][i]);
                }
            }
        }
        prop_assert!(f.sqrt_det > 0.0);
        prop_assert!(f.scalar_curvature().abs() < 1e-8);
        // g = φ⁴δ gives |∇x3| = φ^{-2}.
        let phi = g.conformal_factor(&Jet::point(x)).unwrap().v;
        let n = f.gradient(&Jet::variable(x2, 2)).norm;
        prop_assert!((n - phi.powi(-2)).abs() < 1e-12);
    }

    #[test]
    fn trace_identity_for_perturbed_metrics(
        seed in 0u64..50,
        x0 in -6.0f64..6.0,
        x1 in -6.0f64..6.0,
        x2 in 0.0f64..6.0,
    ) {
        let g = make_perturbed_flat(0.1, 0.9, seed).unwrap();
        let x = [x0, x1, x2];
        let f = frame(&g, x).unwrap();
        let u = pmtk_core::geometry::test_field(&Jet::point(x));
        let h = f.hessian(&u);
        prop_assert!((f.trace(&h.matrix) - f.laplacian_divergence_form(&u)).abs() <= 1e-10);
        prop_assert!(h.norm_sq >= 0.0);
    }
}
