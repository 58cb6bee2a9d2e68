use alloc::vec::Vec;

use super::pointwise::{pointwise, Pointwise};
use crate::error::{Error, Result};
use crate::math;
use crate::metric::{Mat3, MetricField};
use crate::par;
use crate::solver::DiscreteField;

/// Number of uniform bins in the slab route.
pub const SLAB_BINS: usize = 64;
/// Number of interior levels for the isosurface route.
pub const ISO_LEVELS: usize = 5;
/// Slab width around each sampled level, as a fraction of the range of `u`.
const LEVEL_SLAB: f64 = 1.0 / 256.0;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LevelArea {
    pub level: f64,
    /// `∫_{u = t} f dA` from the triangulated level set.
    pub isosurface: f64,
    /// The same quantity from a thin slab `(1/δ) ∫_{|u - t| < δ/2} f|∇u| dV`.
    pub slab: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CoareaReport {
    /// `∫ f |∇u| dV` by cell sums.
    pub volume_integral: f64,
    /// `Σ Δt · slab(t)` over uniform bins of the range of `u`.
    pub slab_integral: f64,
    pub empty_bins: usize,
    pub levels: Vec<LevelArea>,
    /// `max |isosurface - slab| / |isosurface|` over the sampled levels.
    pub mismatch: f64,
}

/// Coarea consistency for `∫ f|∇u| dV = ∫ dt ∫_{u=t} f dA`.
///
/// Each cell is split into six tetrahedra along its main diagonal, with `u`
/// linear and the metric and integrand constant (vertex averages) on each.
/// Slab integrals use exact volume fractions of the tetrahedra, so the two
/// volume routes agree to round-off; the isosurface route integrates the
/// piecewise-planar level set directly.
pub fn coarea_check(
    metric: &dyn MetricField,
    u: &DiscreteField,
    f: &(dyn Fn([f64; 3]) -> f64 + Sync),
) -> Result<CoareaReport> {
    coarea_from(&pointwise(metric, u)?, u, f)
}

struct Tet {
    xi: [[f64; 3]; 4],
    u: [f64; 4],
    /// Vertex average of `f |∇u| √ĝ`.
    q: f64,
    /// Vertex average of `f`.
    f: f64,
    g: Mat3,
    volume: f64,
}

// Kuhn split: each tetrahedron follows one monotone path from corner 0 to 7.
const PATHS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

pub(crate) fn coarea_from(
    pw: &Pointwise,
    u: &DiscreteField,
    f: &(dyn Fn([f64; 3]) -> f64 + Sync),
) -> Result<CoareaReport> {
    let d = &u.domain;
    let (lo, hi) = (0..d.len())
        .filter(|&p| d.tags[p].is_active())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(u.values[p]), b.max(u.values[p]))
        });
    if !(hi > lo) {
        return Err(Error::Domain("coarea check needs a nonconstant field".into()));
    }
    let range = hi - lo;
    let levels: Vec<f64> = (1..=ISO_LEVELS)
        .map(|k| regular_level(u, lo + k as f64 * range / (ISO_LEVELS + 1) as f64, range))
        .collect();
    let delta = LEVEL_SLAB * range;
    let bin = range / SLAB_BINS as f64;
    let fv: Vec<f64> = (0..d.len())
        .map(|p| if d.tags[p].is_active() { f(d.positions[p]) } else { 0.0 })
        .collect();

    // Accumulator layout: volume, bins, then (iso, slab) per level.
    let width = 1 + SLAB_BINS + 2 * ISO_LEVELS;
    let r0 = d.cell_range(0);
    let rows = par::map(r0.len(), |row| {
        let i = r0.start + row as isize;
        let mut acc = alloc::vec![0.0; width];
        for j in d.cell_range(1) {
            for k in d.cell_range(2) {
                let lo_c = [i, j, k];
                let Some(cs) = d.cell_corners(lo_c) else { continue };
                if !cs.iter().all(|&p| pw.nodes[p].is_some()) {
                    continue;
                }
                let xi: [[f64; 3]; 8] = core::array::from_fn(|s| {
                    core::array::from_fn(|a| d.cell_coord(a, lo_c[a], (s >> (2 - a)) & 1))
                });
                let vol = d.cell_measure(lo_c) / 6.0;
                for path in PATHS {
                    let mut v = [0usize; 4];
                    for (step, &a) in path.iter().enumerate() {
                        v[step + 1] = v[step] | (1 << (2 - a));
                    }
                    let mut tet = Tet {
                        xi: v.map(|s| xi[s]),
                        u: v.map(|s| u.values[cs[s]]),
                        q: 0.0,
                        f: 0.0,
                        g: [[0.0; 3]; 3],
                        volume: vol,
                    };
                    for &s in &v {
                        let n = pw.nodes[cs[s]].expect("checked above");
                        let fs = fv[cs[s]];
                        tet.q += 0.25 * fs * n.grad * n.frame.sqrt_det;
                        tet.f += 0.25 * fs;
                        for a in 0..3 {
                            for b in 0..3 {
                                tet.g[a][b] += 0.25 * n.frame.g[a][b];
                            }
                        }
                    }
                    accumulate(&tet, &mut acc, lo, bin, &levels, delta);
                }
            }
        }
        acc
    });
    let total: Vec<f64> = (0..width)
        .map(|c| {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            par::pairwise_sum(&col)
        })
        .collect();
    let slab_integral = par::pairwise_sum(&total[1..1 + SLAB_BINS]);
    let empty_bins = total[1..1 + SLAB_BINS].iter().filter(|&&v| v == 0.0).count();
    let levels: Vec<LevelArea> = levels
        .iter()
        .enumerate()
        .map(|(k, &t)| LevelArea {
            level: t,
            isosurface: total[1 + SLAB_BINS + 2 * k],
            slab: total[2 + SLAB_BINS + 2 * k] / delta,
        })
        .collect();
    let mismatch = levels
        .iter()
        .map(|l| math::abs(l.isosurface - l.slab) / math::abs(l.isosurface))
        .fold(0.0, f64::max);
    Ok(CoareaReport {
        volume_integral: total[0],
        slab_integral,
        empty_bins,
        levels,
        mismatch,
    })
}

fn accumulate(tet: &Tet, acc: &mut [f64], lo: f64, bin: f64, levels: &[f64], delta: f64) {
    let mass = tet.q * tet.volume;
    acc[0] += mass;
    let (umin, umax) = tet.u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
        (a.min(x), b.max(x))
    });
    let first = (((umin - lo) / bin) as usize).min(SLAB_BINS - 1);
    let last = (((umax - lo) / bin) as usize).min(SLAB_BINS - 1);
    for b in first..=last {
        let (t0, t1) = (lo + b as f64 * bin, lo + (b + 1) as f64 * bin);
        let t0 = if b == 0 { f64::NEG_INFINITY } else { t0 };
        let t1 = if b == SLAB_BINS - 1 { f64::INFINITY } else { t1 };
        acc[1 + b] += mass * (fraction_below(&tet.u, t1) - fraction_below(&tet.u, t0));
    }
    let base = 1 + SLAB_BINS;
    for (k, &t) in levels.iter().enumerate() {
        if t - 0.5 * delta > umax || t + 0.5 * delta < umin {
            continue;
        }
        acc[base + 2 * k] += tet.f * level_area(tet, t);
        acc[base + 2 * k + 1] += mass
            * (fraction_below(&tet.u, t + 0.5 * delta) - fraction_below(&tet.u, t - 0.5 * delta));
    }
}

fn sorted(u: &[f64; 4]) -> [usize; 4] {
    let mut o = [0, 1, 2, 3];
    o.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
    o
}

/// Volume fraction of a tetrahedron where the linear interpolant of `u`
/// lies below `t`.
pub(crate) fn fraction_below(u: &[f64; 4], t: f64) -> f64 {
    let o = sorted(u);
    let v = o.map(|i| u[i]);
    let below = v.iter().filter(|&&x| x < t).count();
    match below {
        0 => 0.0,
        4 => 1.0,
        1 => (1..4).map(|j| (t - v[0]) / (v[j] - v[0])).product(),
        3 => 1.0 - (0..3).map(|j| (v[3] - t) / (v[3] - v[j])).product::<f64>(),
        _ => {
            // Reference simplex: vertex 0 at the origin, 1..3 on unit axes.
            let e = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            let cut = |i: usize, j: usize| {
                let s = (t - v[i]) / (v[j] - v[i]);
                [0, 1, 2].map(|a| e[i][a] + s * (e[j][a] - e[i][a]))
            };
            let (a, b) = (e[0], e[1]);
            let (c, dd) = (cut(0, 2), cut(0, 3));
            let (ee, ff) = (cut(1, 2), cut(1, 3));
            // Prism a c dd / b ee ff.
            let vol = tet_volume(a, c, dd, b) + tet_volume(c, dd, b, ee) + tet_volume(dd, b, ee, ff);
            (6.0 * vol).clamp(0.0, 1.0)
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn tet_volume(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> f64 {
    let (x, y, z) = (sub(b, a), sub(c, a), sub(d, a));
    let det = x[0] * (y[1] * z[2] - y[2] * z[1]) - x[1] * (y[0] * z[2] - y[2] * z[0])
        + x[2] * (y[0] * z[1] - y[1] * z[0]);
    math::abs(det) / 6.0
}

fn triangle_area(g: &Mat3, a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let (e1, e2) = (sub(b, a), sub(c, a));
    let ip = |x: &[f64; 3], y: &[f64; 3]| -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += g[i][j] * x[i] * y[j];
            }
        }
        s
    };
    let det = ip(&e1, &e1) * ip(&e2, &e2) - ip(&e1, &e2) * ip(&e1, &e2);
    0.5 * math::sqrt(det.max(0.0))
}

/// Metric area of the planar piece `{u = t}` inside a tetrahedron.
fn level_area(tet: &Tet, t: f64) -> f64 {
    let o = sorted(&tet.u);
    let v = o.map(|i| tet.u[i]);
    let x = o.map(|i| tet.xi[i]);
    let cut = |i: usize, j: usize| {
        let s = (t - v[i]) / (v[j] - v[i]);
        [0, 1, 2].map(|a| x[i][a] + s * (x[j][a] - x[i][a]))
    };
    match v.iter().filter(|&&y| y < t).count() {
        1 => triangle_area(&tet.g, cut(0, 1), cut(0, 2), cut(0, 3)),
        3 => triangle_area(&tet.g, cut(0, 3), cut(1, 3), cut(2, 3)),
        2 => {
            let (p02, p12, p13, p03) = (cut(0, 2), cut(1, 2), cut(1, 3), cut(0, 3));
            triangle_area(&tet.g, p02, p12, p13) + triangle_area(&tet.g, p02, p13, p03)
        }
        _ => 0.0,
    }
}

/// Moves `t` off node values so every level is regular on the grid.
pub(crate) fn regular_level(u: &DiscreteField, t: f64, range: f64) -> f64 {
    let mut t = t;
    let nudge = 1e-9 * range.max(f64::MIN_POSITIVE);
    while u.values.iter().any(|&v| v == t) {
        t += nudge;
    }
    t
}
