use alloc::vec::Vec;

use super::assemble::LinearSystem;
use super::cg::conjugate_gradient;
use super::domain::{Domain, Tag};
use crate::error::{Error, Result};
use crate::geometry::{chart_transform, frame, PointFrame};
use crate::jet::Jet;
use crate::metric::MetricField;
use crate::par;

/// Grid values of the harmonic coordinate with solver metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    pub domain: Domain,
    /// One value per node; NaN on excluded nodes.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub history: Vec<f64>,
}

/// Solves the assembled system by conjugate gradients, starting from the
/// height function `x3`, and scatters the result onto the grid.
pub fn solve(system: &LinearSystem, tol: f64) -> Result<DiscreteField> {
    let d = &system.domain;
    let mut x0 = alloc::vec![0.0; d.n_unknowns];
    for p in 0..d.len() {
        if d.unknown[p] != usize::MAX {
            x0[d.unknown[p]] = d.positions[p][2];
        }
    }
    let out = conjugate_gradient(&system.matrix, &system.rhs, x0, tol)?;
    let values = (0..d.len())
        .map(|p| match d.tags[p] {
            Tag::Excluded => f64::NAN,
            t if t.is_unknown() => out.x[d.unknown[p]],
            _ => system.dirichlet[p],
        })
        .collect();
    Ok(DiscreteField {
        domain: d.clone(),
        values,
        iterations: out.iterations,
        relative_residual: out.relative_residual,
        history: out.history,
    })
}

impl DiscreteField {
    /// A field given by a function of physical position, on every active node.
    pub fn from_fn(domain: &Domain, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..domain.len())
            .map(|p| {
                if domain.tags[p].is_active() {
                    f(domain.positions[p])
                } else {
                    f64::NAN
                }
            })
            .collect();
        DiscreteField {
            domain: domain.clone(),
            values,
            iterations: 0,
            relative_residual: 0.0,
            history: Vec::new(),
        }
    }

    fn active(&self, p: usize) -> bool {
        self.domain.tags[p].is_active()
    }

    fn along(&self, p: usize, axis: usize, d: isize) -> Option<usize> {
        self.domain
            .neighbor(p, axis, d)
            .filter(|&q| self.active(q))
    }

    /// Second-order first difference; centered when both neighbors exist,
    /// one-sided otherwise.
    fn d1_stencil(&self, p: usize, axis: usize) -> Option<[(usize, f64); 3]> {
        let h = self.domain.step(axis);
        let (m1, p1) = (self.along(p, axis, -1), self.along(p, axis, 1));
        if let (Some(a), Some(b)) = (m1, p1) {
            return Some([(a, -0.5 / h), (b, 0.5 / h), (p, 0.0)]);
        }
        if let (Some(a), Some(b)) = (p1, self.along(p, axis, 2)) {
            return Some([(p, -1.5 / h), (a, 2.0 / h), (b, -0.5 / h)]);
        }
        if let (Some(a), Some(b)) = (m1, self.along(p, axis, -2)) {
            return Some([(p, 1.5 / h), (a, -2.0 / h), (b, 0.5 / h)]);
        }
        None
    }

    pub fn first_derivative(&self, p: usize, axis: usize) -> Result<f64> {
        let s = self
            .d1_stencil(p, axis)
            .ok_or(Error::StencilOutOfDomain { node: p, axis })?;
        Ok(s.iter().map(|&(q, w)| w * self.values[q]).sum())
    }

    fn second_derivative(&self, p: usize, axis: usize) -> Result<f64> {
        let h2 = self.domain.step(axis) * self.domain.step(axis);
        let u = |q: usize| self.values[q];
        let (m1, p1) = (self.along(p, axis, -1), self.along(p, axis, 1));
        if let (Some(a), Some(b)) = (m1, p1) {
            return Ok((u(a) - 2.0 * u(p) + u(b)) / h2);
        }
        let fwd = (p1, self.along(p, axis, 2), self.along(p, axis, 3));
        if let (Some(a), Some(b), Some(c)) = fwd {
            return Ok((2.0 * u(p) - 5.0 * u(a) + 4.0 * u(b) - u(c)) / h2);
        }
        let bwd = (m1, self.along(p, axis, -2), self.along(p, axis, -3));
        if let (Some(a), Some(b), Some(c)) = bwd {
            return Ok((2.0 * u(p) - 5.0 * u(a) + 4.0 * u(b) - u(c)) / h2);
        }
        Err(Error::StencilOutOfDomain { node: p, axis })
    }

    /// Value, chart gradient and chart Hessian at a node by finite differences.
    pub fn jet(&self, p: usize) -> Result<Jet> {
        let mut j = Jet::constant(self.values[p]);
        for a in 0..3 {
            j.d[a] = self.first_derivative(p, a)?;
            j.h[a][a] = self.second_derivative(p, a)?;
        }
        for a in 0..3 {
            for b in (a + 1)..3 {
                let s = self
                    .d1_stencil(p, a)
                    .ok_or(Error::StencilOutOfDomain { node: p, axis: a })?;
                let mut v = 0.0;
                for (q, w) in s {
                    if w != 0.0 {
                        v += w * self.first_derivative(q, b)?;
                    }
                }
                j.h[a][b] = v;
                j.h[b][a] = v;
            }
        }
        Ok(j)
    }

    /// True when every node within `depth` steps along each axis is interior.
    pub fn is_deep_interior(&self, p: usize, depth: usize) -> bool {
        if self.domain.tags[p] != Tag::Interior {
            return false;
        }
        (0..3).all(|a| {
            (1..=depth as isize).all(|k| {
                [-k, k].iter().all(|&d| {
                    self.domain
                        .neighbor(p, a, d)
                        .is_some_and(|q| self.domain.tags[q] == Tag::Interior)
                })
            })
        }) && !(self.domain.axes[1].half_cell_lo && self.domain.ijk(p)[1] < depth)
    }
}

/// Metric frame at a node in chart coordinates.
pub fn node_frame(metric: &dyn MetricField, domain: &Domain, p: usize) -> Result<PointFrame> {
    frame(&chart_transform(metric, domain.chart), domain.xi(p))
}

/// `max |Δ_g u|` over nodes at least two cells from any boundary, with `Δ_g`
/// the continuous operator applied to finite-difference derivatives.
pub fn residual(metric: &dyn MetricField, field: &DiscreteField) -> Result<f64> {
    let d = &field.domain;
    let vals = par::map(d.len(), |p| {
        if !field.is_deep_interior(p, 2) {
            return Ok(0.0);
        }
        let f = node_frame(metric, d, p)?;
        Ok(f.laplacian(&field.jet(p)?).abs())
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `min |∇u|` over boundary-plane nodes, with one-sided normal differences.
/// Nodes whose stencil is cut by an excision are skipped.
pub fn min_gradient_on_sigma(metric: &dyn MetricField, field: &DiscreteField) -> Result<f64> {
    let d = &field.domain;
    let vals = par::map(d.len(), |p| {
        if d.tags[p] != Tag::Sigma {
            return Ok(f64::INFINITY);
        }
        let Ok(j) = field.jet(p) else {
            return Ok(f64::INFINITY);
        };
        Ok(node_frame(metric, d, p)?.gradient(&j).norm)
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}
