use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Chart, RadialMap, THETA_MIN};
use crate::math;
use crate::metric::{Excision, MetricField};

/// Uniformly spaced nodes `start + i·step`, `i < len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
    pub periodic: bool,
    /// The lower end is a zero-flux face half a step below the first node.
    pub half_cell_lo: bool,
}

impl Axis {
    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// Neighbor index `i + d`, wrapping on periodic axes.
    pub fn offset(&self, i: usize, d: isize) -> Option<usize> {
        let j = i as isize + d;
        if self.periodic {
            Some(j.rem_euclid(self.len as isize) as usize)
        } else if j >= 0 && (j as usize) < self.len {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Number of grid cells along the axis.
    pub fn cells(&self) -> usize {
        if self.periodic {
            self.len
        } else {
            self.len - 1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    Interior,
    /// Dirichlet `u = 0` on the boundary plane.
    Sigma,
    /// Dirichlet `u = x3` on the truncation surface.
    Outer,
    /// Zero-flux condition on the horizon.
    Horizon,
    /// Inside an excised region; not part of the problem.
    Excluded,
}

impl Tag {
    pub fn is_unknown(self) -> bool {
        matches!(self, Tag::Interior | Tag::Horizon)
    }

    pub fn is_active(self) -> bool {
        self != Tag::Excluded
    }
}

/// Truncation of the exterior region.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Truncation {
    /// `[-A, A]² × [0, H]` in physical coordinates. With `stretch = Some(ℓ)`
    /// nodes are uniform in `ξ` with `x = ℓ sinh(ξ/ℓ)`.
    Box {
        half_width: f64,
        height: f64,
        stretch: Option<f64>,
    },
    /// Half-shell between the horizon and `r_out`, logarithmic in `r`.
    Shell { r_out: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub chart: Chart,
    pub truncation: Truncation,
    pub axes: [Axis; 3],
    pub tags: Vec<Tag>,
    /// Physical position of every node.
    pub positions: Vec<[f64; 3]>,
    /// Unknown number of every node, `usize::MAX` for known or excluded nodes.
    pub unknown: Vec<usize>,
    pub n_unknowns: usize,
    /// True when the horizon is represented by grid-aligned faces.
    pub staircase: bool,
}

impl Domain {
    pub fn dims(&self) -> [usize; 3] {
        [self.axes[0].len, self.axes[1].len, self.axes[2].len]
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        (ijk[0] * self.axes[1].len + ijk[1]) * self.axes[2].len + ijk[2]
    }

    pub fn ijk(&self, p: usize) -> [usize; 3] {
        let n2 = self.axes[2].len;
        let n1 = self.axes[1].len;
        [p / (n1 * n2), (p / n2) % n1, p % n2]
    }

    /// Chart coordinates of a node.
    pub fn xi(&self, p: usize) -> [f64; 3] {
        let c = self.ijk(p);
        [
            self.axes[0].coord(c[0]),
            self.axes[1].coord(c[1]),
            self.axes[2].coord(c[2]),
        ]
    }

    pub fn neighbor(&self, p: usize, axis: usize, d: isize) -> Option<usize> {
        let mut c = self.ijk(p);
        c[axis] = self.axes[axis].offset(c[axis], d)?;
        Some(self.index(c))
    }

    pub fn step(&self, axis: usize) -> f64 {
        self.axes[axis].step
    }

    /// Computational volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes[0].step * self.axes[1].step * self.axes[2].step
    }

    /// Lower-corner indices of every cell; the lower-corner index of a cell
    /// may be `-1` along a half-cell axis (a ghost cell mirroring cell 0).
    pub fn cell_corners(&self, lo: [isize; 3]) -> Option<[usize; 8]> {
        let mut out = [0usize; 8];
        for (s, slot) in out.iter_mut().enumerate() {
            let mut c = [0usize; 3];
            for a in 0..3 {
                let bit = (s >> (2 - a)) & 1;
                let i = lo[a] + bit as isize;
                c[a] = if i < 0 && self.axes[a].half_cell_lo {
                    // The ghost cell reuses the first real layer.
                    0
                } else {
                    self.axes[a].offset(0, i)?
                };
            }
            *slot = self.index(c);
        }
        Some(out)
    }

    /// True when every corner of the cell is active.
    pub fn cell_active(&self, lo: [isize; 3]) -> bool {
        match self.cell_corners(lo) {
            Some(cs) => cs.iter().all(|&p| self.tags[p].is_active()),
            None => false,
        }
    }

    /// Ranges of cell lower-corner indices per axis, including ghost cells.
    pub fn cell_range(&self, axis: usize) -> core::ops::Range<isize> {
        let a = &self.axes[axis];
        let lo = if a.half_cell_lo { -1 } else { 0 };
        lo..a.cells() as isize
    }

    /// Computational volume of the cell with lower corner `lo`; ghost cells
    /// only extend to the zero-flux face, half a step below layer 0.
    pub fn cell_measure(&self, lo: [isize; 3]) -> f64 {
        let ghost = lo.iter().any(|&i| i < 0);
        self.cell_volume() * if ghost { 0.5 } else { 1.0 }
    }

    /// Chart coordinate of corner `bit` of the cells with lower index `lo`
    /// along `axis`, unwrapped across periodic seams.
    pub fn cell_coord(&self, axis: usize, lo: isize, bit: usize) -> f64 {
        let a = &self.axes[axis];
        if lo < 0 && bit == 0 {
            a.start - 0.5 * a.step
        } else {
            a.start + (lo + bit as isize) as f64 * a.step
        }
    }

    /// Normal axis of the boundary plane in the chart and the layer of nodes
    /// lying on it.
    pub fn sigma_layer(&self) -> (usize, usize) {
        match self.chart {
            Chart::Spherical { .. } => (1, self.axes[1].len - 1),
            Chart::Cartesian { .. } => (2, 0),
        }
    }

    /// Trapezoid weights per node (computational volume): each active cell
    /// gives an eighth of its measure to every corner.
    pub fn node_weights(&self) -> Vec<f64> {
        let mut w = alloc::vec![0.0; self.len()];
        for i in self.cell_range(0) {
            for j in self.cell_range(1) {
                for k in self.cell_range(2) {
                    let lo = [i, j, k];
                    let Some(cs) = self.cell_corners(lo) else { continue };
                    if !cs.iter().all(|&p| self.tags[p].is_active()) {
                        continue;
                    }
                    let m = 0.125 * self.cell_measure(lo);
                    for p in cs {
                        w[p] += m;
                    }
                }
            }
        }
        w
    }

    /// Trapezoid weights (computational area) on the boundary-plane nodes
    /// and the two chart axes spanning the plane.
    pub fn sigma_weights(&self) -> ([usize; 2], Vec<f64>) {
        let (s, layer) = self.sigma_layer();
        let t = match s {
            1 => [0, 2],
            _ => [0, 1],
        };
        let area = self.step(t[0]) * self.step(t[1]);
        let lo_s = if layer == 0 { 0 } else { layer as isize - 1 };
        let mut w = alloc::vec![0.0; self.len()];
        for a in self.cell_range(t[0]) {
            for b in self.cell_range(t[1]) {
                let mut lo = [0isize; 3];
                lo[t[0]] = a;
                lo[t[1]] = b;
                lo[s] = lo_s;
                let Some(cs) = self.cell_corners(lo) else { continue };
                if !cs.iter().all(|&p| self.tags[p].is_active()) {
                    continue;
                }
                let face: Vec<usize> = cs
                    .iter()
                    .copied()
                    .filter(|&p| self.ijk(p)[s] == layer)
                    .collect();
                if face.iter().all(|&p| self.tags[p] == Tag::Sigma) {
                    for p in face {
                        w[p] += 0.25 * area;
                    }
                }
            }
        }
        (t, w)
    }

    pub fn nodes_with(&self, tag: Tag) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&p| self.tags[p] == tag)
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }
}

/// Builds the grid, tags and unknown numbering.
///
/// `nodes` are per-axis node counts: `(x1, x2, x3)` for a box and
/// `(ln r, θ, ϕ)` for a shell. A shell needs exactly one excision centered
/// on the boundary plane; a box accepts only excisions flagged approximate,
/// which are resolved by a staircase.
pub fn build_domain(metric: &dyn MetricField, nodes: [usize; 3], truncation: Truncation) -> Result<Domain> {
    if nodes.iter().any(|&n| n < 8) {
        return Err(Error::Domain(format!(
            "at least 8 nodes per axis are required, got {nodes:?}"
        )));
    }
    match truncation {
        Truncation::Shell { r_out } => build_shell(metric, nodes, r_out, truncation),
        Truncation::Box {
            half_width,
            height,
            stretch,
        } => build_box(metric, nodes, half_width, height, stretch, truncation),
    }
}

fn build_shell(metric: &dyn MetricField, nodes: [usize; 3], r_out: f64, truncation: Truncation) -> Result<Domain> {
    let ex: &Excision = match metric.excisions() {
        [e] if e.on_boundary() => e,
        [] => {
            return Err(Error::Domain(
                "a half-shell needs a horizon to fit its inner boundary".into(),
            ))
        }
        _ => {
            return Err(Error::Domain(
                "a half-shell fits exactly one horizon centered on the boundary plane".into(),
            ))
        }
    };
    if !(r_out > ex.radius) {
        return Err(Error::Domain(format!(
            "outer radius {r_out} does not clear the horizon radius {}",
            ex.radius
        )));
    }
    let s0 = math::ln(ex.radius);
    let s1 = math::ln(r_out);
    let dtheta = (PI / 2.0 - THETA_MIN) / (nodes[1] as f64 - 0.5);
    let axes = [
        Axis {
            start: s0,
            step: (s1 - s0) / (nodes[0] - 1) as f64,
            len: nodes[0],
            periodic: false,
            half_cell_lo: false,
        },
        Axis {
            start: THETA_MIN + 0.5 * dtheta,
            step: dtheta,
            len: nodes[1],
            periodic: false,
            half_cell_lo: true,
        },
        Axis {
            start: 0.0,
            step: 2.0 * PI / nodes[2] as f64,
            len: nodes[2],
            periodic: true,
            half_cell_lo: false,
        },
    ];
    let chart = Chart::Spherical {
        center: ex.center,
        radial: RadialMap::Log,
    };
    let mut d = empty_domain(chart, truncation, axes);
    for p in 0..d.len() {
        let [i, j, _] = d.ijk(p);
        d.tags[p] = if j == nodes[1] - 1 {
            Tag::Sigma
        } else if i == 0 {
            Tag::Horizon
        } else if i == nodes[0] - 1 {
            Tag::Outer
        } else {
            Tag::Interior
        };
    }
    // The last θ layer sits exactly on the boundary plane.
    for p in d.nodes_with(Tag::Sigma).collect::<Vec<_>>() {
        d.positions[p][2] = 0.0;
    }
    number_unknowns(&mut d);
    Ok(d)
}

fn build_box(
    metric: &dyn MetricField,
    nodes: [usize; 3],
    half_width: f64,
    height: f64,
    stretch: Option<f64>,
    truncation: Truncation,
) -> Result<Domain> {
    if !(half_width > 0.0 && height > 0.0) {
        return Err(Error::Domain("box extents must be positive".into()));
    }
    if let Some(l) = stretch {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!("stretch length must be positive, got {l}")));
        }
    }
    let excisions = metric.excisions();
    if let Some(e) = excisions.iter().find(|e| !e.approximate) {
        return Err(Error::Domain(format!(
            "horizon at {:?} must be fitted by a half-shell; staircase excision is only used for approximate horizons",
            e.center
        )));
    }
    let to_xi = |x: f64| match stretch {
        Some(l) => l * math::asinh(x / l),
        None => x,
    };
    let (w, h) = (to_xi(half_width), to_xi(height));
    let axes = [
        axis_between(-w, w, nodes[0]),
        axis_between(-w, w, nodes[1]),
        axis_between(0.0, h, nodes[2]),
    ];
    let chart = Chart::Cartesian { stretch };
    let mut d = empty_domain(chart, truncation, axes);
    for p in 0..d.len() {
        let x = d.positions[p];
        if excisions.iter().any(|e| e.contains(x)) {
            d.tags[p] = Tag::Excluded;
        }
    }
    // Nodes that belong to no complete cell cannot carry the zero-flux
    // condition; they are dropped with the excised region.
    if !excisions.is_empty() {
        let orphans: Vec<usize> = (0..d.len())
            .filter(|&p| d.tags[p].is_active() && !touches_active_cell(&d, p))
            .collect();
        for p in orphans {
            d.tags[p] = Tag::Excluded;
        }
    }
    for e in excisions {
        let inside = (0..d.len()).filter(|&p| e.contains(d.positions[p])).count();
        if inside == 0 {
            return Err(Error::Domain(format!(
                "horizon of radius {} at {:?} is not resolved by the grid",
                e.radius, e.center
            )));
        }
        if e.center[2] + e.radius >= height
            || e.center[0].abs() + e.radius >= half_width
            || e.center[1].abs() + e.radius >= half_width
        {
            return Err(Error::Domain(format!(
                "horizon at {:?} meets the outer boundary",
                e.center
            )));
        }
    }
    let n = nodes;
    for p in 0..d.len() {
        if d.tags[p] == Tag::Excluded {
            continue;
        }
        let c = d.ijk(p);
        let on_outer =
            c[0] == 0 || c[0] == n[0] - 1 || c[1] == 0 || c[1] == n[1] - 1 || c[2] == n[2] - 1;
        let near_excision = (0..3).any(|a| {
            [-1, 1].iter().any(|&s| {
                d.neighbor(p, a, s)
                    .is_some_and(|q| d.tags[q] == Tag::Excluded)
            })
        });
        d.tags[p] = if c[2] == 0 {
            Tag::Sigma
        } else if near_excision {
            Tag::Horizon
        } else if on_outer {
            Tag::Outer
        } else {
            Tag::Interior
        };
    }
    for p in d.nodes_with(Tag::Sigma).collect::<Vec<_>>() {
        d.positions[p][2] = 0.0;
    }
    d.staircase = !excisions.is_empty();
    number_unknowns(&mut d);
    Ok(d)
}

fn touches_active_cell(d: &Domain, p: usize) -> bool {
    let c = d.ijk(p);
    (0..8).any(|s| {
        let lo = [0, 1, 2].map(|a| c[a] as isize - ((s >> a) & 1) as isize);
        d.cell_active(lo)
    })
}

fn axis_between(a: f64, b: f64, n: usize) -> Axis {
    Axis {
        start: a,
        step: (b - a) / (n - 1) as f64,
        len: n,
        periodic: false,
        half_cell_lo: false,
    }
}

fn empty_domain(chart: Chart, truncation: Truncation, axes: [Axis; 3]) -> Domain {
    let len = axes[0].len * axes[1].len * axes[2].len;
    let mut d = Domain {
        chart,
        truncation,
        axes,
        tags: alloc::vec![Tag::Interior; len],
        positions: Vec::new(),
        unknown: Vec::new(),
        n_unknowns: 0,
        staircase: false,
    };
    d.positions = (0..len).map(|p| chart.to_cartesian(d.xi(p))).collect();
    d
}

fn number_unknowns(d: &mut Domain) {
    let mut next = 0;
    d.unknown = d
        .tags
        .iter()
        .map(|t| {
            if t.is_unknown() {
                next += 1;
                next - 1
            } else {
                usize::MAX
            }
        })
        .collect();
    d.n_unknowns = next;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{
        make_conformal_superposition, make_flat, make_half_schwarzschild, Bubble,
        ConformalBubbleSpec,
    };

    #[test]
    fn flat_box_has_no_horizon() {
        let d = build_domain(
            &make_flat(),
            [32, 32, 17],
            Truncation::Box {
                half_width: 8.0,
                height: 8.0,
                stretch: None,
            },
        )
        .unwrap();
        assert_eq!(d.count(Tag::Horizon), 0);
        assert_eq!(d.count(Tag::Sigma), 32 * 32);
        assert_eq!(d.n_unknowns, 30 * 30 * 15);
        assert!(!d.staircase);
    }

    #[test]
    fn shell_horizon_is_the_inner_sphere() {
        let g = make_half_schwarzschild(1.0).unwrap();
        let d = build_domain(&g, [16, 12, 24], Truncation::Shell { r_out: 10.0 }).unwrap();
        assert_eq!(d.len(), 16 * 12 * 24);
        for p in d.nodes_with(Tag::Horizon) {
            let x = d.positions[p];
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            assert!((r - 0.5).abs() < 1e-14);
        }
        assert_eq!(d.count(Tag::Horizon), 11 * 24);
        assert_eq!(d.count(Tag::Sigma), 16 * 24);
        assert_eq!(d.count(Tag::Outer), 11 * 24);
        let theta_last = d.axes[1].coord(11);
        assert!((theta_last - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_horizon_box_is_rejected() {
        let g = make_half_schwarzschild(1.0).unwrap();
        let r = build_domain(
            &g,
            [16, 16, 9],
            Truncation::Box {
                half_width: 8.0,
                height: 8.0,
                stretch: None,
            },
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn staircase_for_two_bubbles() {
        let g = make_conformal_superposition(ConformalBubbleSpec {
            bubbles: alloc::vec![
                Bubble::point(1.0, [2.0, 0.0, 0.0]),
                Bubble::point(1.0, [-2.0, 0.0, 0.0]),
            ],
            mirror: true,
        })
        .unwrap();
        let t = Truncation::Box {
            half_width: 8.0,
            height: 8.0,
            stretch: None,
        };
        let d = build_domain(&g, [33, 33, 17], t).unwrap();
        assert!(d.staircase);
        assert!(d.count(Tag::Excluded) > 0);
        assert!(d.count(Tag::Horizon) > 0);
        // Too coarse to see the horizons at all.
        assert!(build_domain(&g, [8, 8, 8], t).is_err());
    }
}
