use alloc::vec::Vec;
use core::f64::consts::PI;

use super::pointwise::{height_jet, pointwise, NodeData, Pointwise};
use crate::error::Result;
use crate::geometry::quad_pair;
use crate::math;
use crate::metric::MetricField;
use crate::par;
use crate::solver::{DiscreteField, Tag};

/// Relative size of the floor on `|∇u|` in the bulk integrand.
pub const EPSILON_FRACTION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BulkIntegral {
    /// `(1/16π) ∫ (|∇²u|²/|∇u| + R|∇u|) dV`.
    pub value: f64,
    /// The `R|∇u|` part alone, same normalization.
    pub curvature_part: f64,
    /// Share of weighted nodes where `|∇u|` fell below the floor.
    pub eps_fraction: f64,
    /// Active nodes whose difference stencils did not fit.
    pub skipped: usize,
}

pub fn bulk_integral(metric: &dyn MetricField, u: &DiscreteField) -> Result<BulkIntegral> {
    Ok(bulk_from(&pointwise(metric, u)?, u))
}

pub(crate) fn bulk_from(pw: &Pointwise, u: &DiscreteField) -> BulkIntegral {
    let d = &u.domain;
    let w = d.node_weights();
    let gmax = par::max(d.len(), |p| pw.nodes[p].map_or(f64::NEG_INFINITY, |n| n.grad));
    let eps = EPSILON_FRACTION * gmax.max(0.0);
    let node = |p: usize| -> Option<(&NodeData, f64)> {
        let n = pw.nodes[p].as_ref()?;
        (w[p] > 0.0).then_some((n, w[p] * n.frame.sqrt_det))
    };
    let hess = par::sum(d.len(), |p| {
        node(p).map_or(0.0, |(n, dv)| n.hess_sq / n.grad.max(eps) * dv)
    });
    let curv = par::sum(d.len(), |p| node(p).map_or(0.0, |(n, dv)| n.scalar * n.grad * dv));
    let weighted = (0..d.len()).filter(|&p| node(p).is_some()).count();
    let below = (0..d.len())
        .filter(|&p| node(p).is_some_and(|(n, _)| n.grad < eps))
        .count();
    let c = 1.0 / (16.0 * PI);
    BulkIntegral {
        value: c * (hess + curv),
        curvature_part: c * curv,
        eps_fraction: below as f64 / weighted.max(1) as f64,
        skipped: pw.skipped,
    }
}

/// `(1/8π) ∫_Σ H |∇u| dA` with trapezoid weights on the boundary-plane nodes.
pub fn boundary_integral(metric: &dyn MetricField, u: &DiscreteField) -> Result<f64> {
    Ok(boundary_from(&pointwise(metric, u)?, u))
}

pub(crate) fn boundary_from(pw: &Pointwise, u: &DiscreteField) -> f64 {
    let d = &u.domain;
    let (t, w) = d.sigma_weights();
    let s = par::sum(d.len(), |p| {
        if w[p] == 0.0 {
            return 0.0;
        }
        let Some(n) = pw.nodes[p] else { return 0.0 };
        let h = n.frame.level_mean_curvature(&height_jet(u, p));
        h * n.grad * n.frame.area_density(t[0], t[1]) * w[p]
    });
    s / (8.0 * PI)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityDefect {
    /// `max |∂_ν|∇u| + |∇u| H|` over the sampled nodes.
    pub max: f64,
    pub samples: usize,
}

/// Checks `∂_ν|∇u| = -|∇u| H` on the boundary plane, `ν` its outward unit
/// normal, at nodes at least two steps from the edge of the plane.
pub fn normal_derivative_identity(metric: &dyn MetricField, u: &DiscreteField) -> Result<IdentityDefect> {
    Ok(identity_from(&pointwise(metric, u)?, u))
}

pub(crate) fn identity_from(pw: &Pointwise, u: &DiscreteField) -> IdentityDefect {
    let d = &u.domain;
    let (s, _) = d.sigma_layer();
    let tangential: Vec<usize> = (0..3).filter(|&a| a != s).collect();
    let eligible = |p: usize| {
        d.tags[p] == Tag::Sigma
            && pw.nodes[p].is_some()
            && tangential.iter().all(|&a| {
                [-2isize, -1, 1, 2].iter().all(|&k| {
                    d.neighbor(p, a, k).is_some_and(|q| d.tags[q] == Tag::Sigma)
                })
            })
    };
    let defects = par::map(d.len(), |p| {
        if !eligible(p) {
            return None;
        }
        let n = pw.nodes[p]?;
        let w = height_jet(u, p);
        let fw = n.frame.gradient(&w);
        let nu = fw.vector.map(|v| -v / fw.norm);
        let h = n.frame.level_mean_curvature(&w);
        let gu = n.frame.gradient(&n.jet);
        let hess = n.frame.hessian(&n.jet).matrix;
        let dn = quad_pair(&hess, &nu, &gu.vector) / gu.norm;
        Some(math::abs(dn + gu.norm * h))
    });
    let samples = defects.iter().flatten().count();
    let max = defects.into_iter().flatten().fold(0.0, f64::max);
    IdentityDefect { max, samples }
}
