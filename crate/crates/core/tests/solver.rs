use pmtk_core::metric::{make_flat, make_half_schwarzschild};
use pmtk_core::solver::{
    assemble, build_domain, min_gradient_on_sigma, residual, solve, Tag, Truncation,
};

const LADDER: [[usize; 3]; 3] = [[16, 12, 24], [32, 24, 48], [64, 48, 96]];

// f(1/2) for u = f(r) cos θ on the half-Schwarzschild shell with r_out = 10,
// from an independent collocation solve of (r² φ² f')' = 2 φ² f.
const F_HORIZON_R10: f64 = 0.524_934_383;

#[test]
fn flat_box_reproduces_height() {
    let g = make_flat();
    let d = build_domain(
        &g,
        [17, 17, 9],
        Truncation::Box { half_width: 8.0, height: 8.0, stretch: None },
    )
    .unwrap();
    let s = assemble(&g, &d).unwrap();
    assert_eq!(s.matrix.max_asymmetry(), 0.0);
    assert!(!s.cross_terms);
    let u = solve(&s, 1e-10).unwrap();
    assert_eq!(u.iterations, 0);
    for p in 0..d.len() {
        assert!((u.values[p] - d.positions[p][2]).abs() < 1e-12);
    }
    assert!(residual(&g, &u).unwrap() <= 1e-12);
}

#[test]
fn interior_rows_sum_to_zero() {
    let g = make_half_schwarzschild(1.0).unwrap();
    let d = build_domain(&g, LADDER[0], Truncation::Shell { r_out: 10.0 }).unwrap();
    let s = assemble(&g, &d).unwrap();
    assert_eq!(s.matrix.max_asymmetry(), 0.0);
    let mut checked = 0;
    for p in 0..d.len() {
        if d.tags[p] != Tag::Interior {
            continue;
        }
        let boundary_neighbor = (0..3).any(|a| {
            [-1, 1].iter().any(|&k| d.neighbor(p, a, k).is_some_and(|q| !d.tags[q].is_unknown()))
        });
        if boundary_neighbor {
            continue;
        }
        let row = d.unknown[p];
        let sum: f64 = s.matrix.row(row).map(|(_, v)| v).sum();
        let scale = s.matrix.get(row, row);
        assert!(sum.abs() <= 1e-12 * scale, "row {row}: {sum}");
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn shell_residual_self_converges() {
    let g = make_half_schwarzschild(1.0).unwrap();
    let mut res = Vec::new();
    let mut grad = Vec::new();
    let mut horizon_err = Vec::new();
    for n in LADDER {
        let d = build_domain(&g, n, Truncation::Shell { r_out: 10.0 }).unwrap();
        let u = solve(&assemble(&g, &d).unwrap(), 1e-11).unwrap();
        res.push(residual(&g, &u).unwrap());
        grad.push(min_gradient_on_sigma(&g, &u).unwrap());
        // node closest to the pole on the horizon
        let p = d.index([0, 0, 0]);
        let xi = d.xi(p);
        horizon_err.push((u.values[p] / xi[1].cos() - F_HORIZON_R10).abs());
    }
    for w in res.windows(2) {
        assert!(w[0] / w[1] >= 3.5, "residuals {res:?}");
    }
    assert!(grad.iter().all(|&v| v > 0.0));
    let spread = (grad[2] - grad[1]).abs() / grad[2];
    assert!(spread <= 0.02, "{grad:?}");
    for w in horizon_err.windows(2) {
        assert!(w[0] / w[1] >= 3.5, "{horizon_err:?}");
    }
    assert!(horizon_err[2] < 2e-3, "{horizon_err:?}");
}

#[test]
fn tolerance_tightening_is_stable() {
    let g = make_half_schwarzschild(1.0).unwrap();
    let d = build_domain(&g, LADDER[1], Truncation::Shell { r_out: 10.0 }).unwrap();
    let s = assemble(&g, &d).unwrap();
    let a = solve(&s, 1e-10).unwrap();
    let b = solve(&s, 1e-12).unwrap();
    assert!(b.relative_residual <= 1e-12);
    let diff = a
        .values
        .iter()
        .zip(&b.values)
        .filter(|(x, _)| x.is_finite())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff <= 1e-8, "{diff}");
}
