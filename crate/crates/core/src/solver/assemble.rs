use alloc::vec::Vec;

use super::domain::{Domain, Tag};
use crate::error::{Error, Result};
use crate::geometry::{chart_transform, inv3};
use crate::jet::Jet;
use crate::math;
use crate::metric::{MetricComponents, MetricField};
use crate::par;

/// Compressed sparse rows with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        par::for_each_mut(y, |i, yi| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        });
    }

    /// `max |A_ij - A_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max(math::abs(v - self.get(j, i)));
            }
        }
        m
    }
}

/// Discrete problem on the unknown nodes of a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub domain: Domain,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Boundary data on every node (zero on unknown and excluded nodes).
    pub dirichlet: Vec<f64>,
    /// True when off-diagonal coefficients were large enough to be kept.
    pub cross_terms: bool,
}

const STENCIL: usize = 27;
const CENTER: usize = 13;
const CROSS_THRESHOLD: f64 = 1e-12;

fn slot(d: [isize; 3]) -> usize {
    ((d[0] + 1) * 9 + (d[1] + 1) * 3 + (d[2] + 1)) as usize
}

fn slot_offset(s: usize) -> [isize; 3] {
    [(s / 9) as isize - 1, ((s / 3) % 3) as isize - 1, (s % 3) as isize - 1]
}

/// `√ĝ ĝ^{ab}` at every active node, in chart coordinates.
pub fn flux_coefficients(metric: &dyn MetricField, domain: &Domain) -> Result<Vec<Option<[[f64; 3]; 3]>>> {
    let cm = chart_transform(metric, domain.chart);
    let coef = par::map(domain.len(), |p| {
        if !domain.tags[p].is_active() {
            return Ok(None);
        }
        let xi = domain.xi(p);
        let x = domain.positions[p];
        cm.check_point(xi)?;
        let c = cm.components(&Jet::constant_point(xi));
        let g = [0, 1, 2].map(|i| [0, 1, 2].map(|j| c[i][j].v));
        let (gi, det) = inv3(&g).ok_or(Error::SingularMetric(x))?;
        let s = math::sqrt(det);
        Ok(Some([0, 1, 2].map(|a| [0, 1, 2].map(|b| s * gi[a][b]))))
    });
    coef.into_iter().collect()
}

/// Vertex-centered finite-volume discretization of `-∂_a(√ĝ ĝ^{ab} ∂_b u)`.
///
/// The operator is the Hessian of the discrete energy
/// `½ Σ_edges w (u_p - u_q)² + Σ_cells vol Σ_{a<b} K^{ab} G_a G_b`, where
/// edge weights use the mean of `K^{aa}` at the two ends and `G_a`
/// is the cell-averaged difference along axis `a`. Boundary values are
/// eliminated into the right-hand side.
pub fn assemble(metric: &dyn MetricField, domain: &Domain) -> Result<LinearSystem> {
    let coef = flux_coefficients(metric, domain)?;
    let n = domain.len();
    let h = [domain.step(0), domain.step(1), domain.step(2)];
    let mut rows: Vec<[f64; STENCIL]> = alloc::vec![[0.0; STENCIL]; n];

    for p in 0..n {
        let Some(kp) = coef[p] else { continue };
        let c = domain.ijk(p);
        for a in 0..3 {
            let Some(q) = domain.neighbor(p, a, 1) else { continue };
            let Some(kq) = coef[q] else { continue };
            let (b, e) = ((a + 1) % 3, (a + 2) % 3);
            let mut cells = 0u32;
            for db in [-1isize, 0] {
                for de in [-1isize, 0] {
                    let mut lo = [c[0] as isize, c[1] as isize, c[2] as isize];
                    lo[b] += db;
                    lo[e] += de;
                    if domain.cell_active(lo) {
                        cells += 1;
                    }
                }
            }
            if cells == 0 {
                continue;
            }
            let k = 0.5 * (kp[a][a] + kq[a][a]);
            let w = 0.25 * cells as f64 * k * h[b] * h[e] / h[a];
            let mut d = [0isize; 3];
            d[a] = 1;
            rows[p][slot(d)] -= w;
            rows[p][CENTER] += w;
            d[a] = -1;
            rows[q][slot(d)] -= w;
            rows[q][CENTER] += w;
        }
    }

    let mut max_cross: f64 = 0.0;
    for k in coef.iter().flatten() {
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    max_cross = max_cross.max(math::abs(k[a][b]) / math::sqrt(k[a][a] * k[b][b]));
                }
            }
        }
    }
    let cross_terms = max_cross > CROSS_THRESHOLD;
    if cross_terms {
        let vol = domain.cell_volume();
        for i in 0..domain.axes[0].cells() as isize {
            for j in 0..domain.axes[1].cells() as isize {
                for l in 0..domain.axes[2].cells() as isize {
                    let Some(corners) = domain.cell_corners([i, j, l]) else { continue };
                    if !corners.iter().all(|&p| domain.tags[p].is_active()) {
                        continue;
                    }
                    add_cell_cross_terms(&mut rows, &coef, &corners, h, vol);
                }
            }
        }
    }

    let mut dirichlet = alloc::vec![0.0; n];
    for p in 0..n {
        if domain.tags[p] == Tag::Outer {
            dirichlet[p] = domain.positions[p][2];
        }
    }

    let m = domain.n_unknowns;
    let mut row_ptr = Vec::with_capacity(m + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut rhs = alloc::vec![0.0; m];
    row_ptr.push(0);
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(STENCIL);
    for p in 0..n {
        let r = domain.unknown[p];
        if r == usize::MAX {
            continue;
        }
        entries.clear();
        for (s, &v) in rows[p].iter().enumerate() {
            if v == 0.0 && s != CENTER {
                continue;
            }
            let q = neighbor_by_offset(domain, p, slot_offset(s))
                .ok_or(Error::StencilOutOfDomain { node: p, axis: 0 })?;
            if domain.tags[q].is_unknown() {
                entries.push((domain.unknown[q], v));
            } else if domain.tags[q].is_active() {
                rhs[r] -= v * dirichlet[q];
            }
        }
        entries.sort_by_key(|e| e.0);
        for &(j, v) in &entries {
            cols.push(j);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(LinearSystem {
        domain: domain.clone(),
        matrix: CsrMatrix {
            n: m,
            row_ptr,
            cols,
            vals,
        },
        rhs,
        dirichlet,
        cross_terms,
    })
}

fn add_cell_cross_terms(
    rows: &mut [[f64; STENCIL]],
    coef: &[Option<[[f64; 3]; 3]>],
    corners: &[usize; 8],
    h: [f64; 3],
    vol: f64,
) {
    let mut k = [[0.0; 3]; 3];
    for &p in corners {
        let kp = coef[p].expect("active corner");
        for a in 0..3 {
            for b in 0..3 {
                k[a][b] += 0.125 * kp[a][b];
            }
        }
    }
    let bit = |s: usize, a: usize| (s >> (2 - a)) & 1;
    let g = |s: usize, a: usize| {
        if bit(s, a) == 1 {
            0.25 / h[a]
        } else {
            -0.25 / h[a]
        }
    };
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let c = vol * k[a][b];
        for s in 0..8 {
            for t in s..8 {
                let v = c * (g(s, a) * g(t, b) + g(s, b) * g(t, a));
                let d = [0, 1, 2].map(|x| bit(t, x) as isize - bit(s, x) as isize);
                let (ps, pt) = (corners[s], corners[t]);
                if s == t {
                    rows[ps][CENTER] += v;
                } else {
                    rows[ps][slot(d)] += v;
                    rows[pt][slot(d.map(|x| -x))] += v;
                }
            }
        }
    }
}

fn neighbor_by_offset(domain: &Domain, p: usize, d: [isize; 3]) -> Option<usize> {
    let mut c = domain.ijk(p);
    for a in 0..3 {
        c[a] = domain.axes[a].offset(c[a], d[a])?;
    }
    Some(domain.index(c))
}
