use pmtk_core::inequality::{
    boundary_integral, bulk_integral, coarea_check, evaluate, level_connectedness,
    normal_derivative_identity, sample_energy_conditions,
};
use pmtk_core::metric::{
    make_flat, make_half_schwarzschild, Excision, MetricComponents, MetricField, Sym3,
};
use pmtk_core::solver::{assemble, build_domain, solve, DiscreteField, Truncation};
use pmtk_core::Jet;

// B on the shell r ∈ [1/2, 10] for m = 1, from an independent collocation
// solve of the radial equation for u = f(r) cos θ followed by adaptive
// quadrature of the bulk integrand.
const BULK_R10: f64 = 0.350_70;

fn flat_box() -> Truncation {
    Truncation::Box { half_width: 4.0, height: 4.0, stretch: None }
}

#[test]
fn flat_everything_vanishes() {
    let g = make_flat();
    let d = build_domain(&g, [17, 17, 17], flat_box()).unwrap();
    let u = solve(&assemble(&g, &d).unwrap(), 1e-10).unwrap();
    let b = bulk_integral(&g, &u).unwrap();
    assert!(b.value.abs() <= 1e-10, "{b:?}");
    assert_eq!(boundary_integral(&g, &u).unwrap(), 0.0);
    let id = normal_derivative_identity(&g, &u).unwrap();
    assert!(id.samples > 0);
    assert!(id.max <= 1e-12, "{id:?}");
}

#[test]
fn flat_coarea_is_exact() {
    let g = make_flat();
    let d = build_domain(&g, [17, 17, 17], flat_box()).unwrap();
    let u = DiscreteField::from_fn(&d, |x| x[2]);
    let c = coarea_check(&g, &u, &|_| 1.0).unwrap();
    // 8 × 8 × 4 box with |∇u| = 1.
    assert!((c.volume_integral - 256.0).abs() < 1e-9, "{c:?}");
    assert!((c.slab_integral - 256.0).abs() < 1e-9);
    assert_eq!(c.empty_bins, 0);
    // Levels on node planes are moved off by a relative 1e-9.
    for l in &c.levels {
        assert!((l.isosurface - 64.0).abs() < 1e-6, "{l:?}");
    }
    assert!(c.mismatch < 1e-8);
}

#[test]
fn synthetic_identity_on_flat_plane() {
    // u = x3 + x3 x1: ∂3|∇u| = 0 on {x3 = 0}, and H = 0.
    let g = make_flat();
    let d = build_domain(&g, [17, 17, 17], flat_box()).unwrap();
    let u = DiscreteField::from_fn(&d, |x| x[2] + x[2] * x[0]);
    let id = normal_derivative_identity(&g, &u).unwrap();
    assert!(id.max <= 1e-12, "{id:?}");
}

#[test]
fn level_sets_of_flat_and_negative_control() {
    let g = make_flat();
    let d = build_domain(&g, [17, 17, 17], flat_box()).unwrap();
    let plane = DiscreteField::from_fn(&d, |x| x[2]);
    let l = level_connectedness(&plane, &[0.5]);
    assert!(l[0].is_single_lateral(), "{l:?}");

    let bowl = DiscreteField::from_fn(&d, |x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    let l = level_connectedness(&bowl, &[1.0]);
    assert_eq!(l[0].touches_outer, vec![false]);
    let l = level_connectedness(&bowl, &[20.0]);
    assert_eq!(l[0].touches_outer, vec![true]);
}

#[test]
fn half_schwarzschild_integrals() {
    let g = make_half_schwarzschild(1.0).unwrap();
    let mut bulk = Vec::new();
    let mut defect = Vec::new();
    let mut mismatch = Vec::new();
    for n in [[16, 12, 24], [32, 24, 48], [64, 48, 96]] {
        let e = evaluate(&g, n, Truncation::Shell { r_out: 10.0 }, 1e-11).unwrap();
        assert!(e.bulk.value > 0.0);
        assert!(e.bulk.curvature_part.abs() <= 1e-8 * e.bulk.value, "{:?}", e.bulk);
        assert_eq!(e.bulk.eps_fraction, 0.0);
        assert!(e.boundary.abs() <= 1e-8, "{}", e.boundary);
        bulk.push(e.bulk.value);
        defect.push(e.identity().max);
        let c = e.coarea(&|_| 1.0).unwrap();
        assert!((c.slab_integral - c.volume_integral).abs() <= 1e-10 * c.volume_integral);
        mismatch.push(c.mismatch);
        for l in level_connectedness(&e.field, &[0.1, 1.0, 5.0]) {
            assert!(l.is_single_lateral(), "{l:?}");
        }
    }
    let rel = (bulk[2] - bulk[1]).abs() / bulk[2];
    assert!(rel < 0.02, "{bulk:?}");
    assert!((bulk[2] - BULK_R10).abs() < 2e-3 * BULK_R10, "{bulk:?}");
    for w in defect.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.0, "{defect:?}");
    }
    for w in mismatch.windows(2) {
        assert!(w[1] < w[0], "{mismatch:?}");
    }
    assert!(mismatch[2] <= 0.02, "{mismatch:?}");
}

/// `g = φ^4 δ` with `φ = 1 + m / (2|x - p|)` for a source below the plane:
/// harmonic in the half-space and mean convex along the boundary.
struct SourceBelow;

impl MetricComponents for SourceBelow {
    fn components(&self, x: &[Jet; 3]) -> Sym3 {
        let y = [x[0], x[1], x[2] + 1.0];
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        let phi = r.recip().scale(0.25) + 1.0;
        let p4 = phi.powi(4);
        let z = Jet::ZERO;
        [[p4, z, z], [z, p4, z], [z, z, p4]]
    }
}

impl MetricField for SourceBelow {
    fn name(&self) -> String {
        "source-below".into()
    }
    fn decay_rate(&self) -> f64 {
        1.0
    }
    fn mirror_symmetric(&self) -> bool {
        false
    }
    fn excisions(&self) -> &[Excision] {
        &[]
    }
}

#[test]
fn boundary_term_follows_sign_of_mean_curvature() {
    let g = SourceBelow;
    let tr = Truncation::Box { half_width: 6.0, height: 6.0, stretch: None };
    let d = build_domain(&g, [25, 25, 13], tr).unwrap();
    let e = sample_energy_conditions(&g, &d, 2000, 3).unwrap();
    assert!(e.min_mean >= 0.0, "{e:?}");
    assert!(e.min_scalar.abs() < 1e-10, "{e:?}");
    let u = solve(&assemble(&g, &d).unwrap(), 1e-10).unwrap();
    let s = boundary_integral(&g, &u).unwrap();
    assert!(s > 0.0, "{s}");
}
