use alloc::vec::Vec;

use crate::error::Result;
use crate::geometry::{frame, PointFrame};
use crate::jet::Jet;
use crate::metric::MetricField;
use crate::par;
use crate::solver::{node_frame, DiscreteField};

/// Derivative data of the harmonic coordinate at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeData {
    pub jet: Jet,
    pub frame: PointFrame,
    pub grad: f64,
    pub hess_sq: f64,
    /// Scalar curvature at the physical point.
    pub scalar: f64,
}

/// Node data on every active node whose stencils fit in the domain.
pub(crate) struct Pointwise {
    pub nodes: Vec<Option<NodeData>>,
    pub skipped: usize,
}

pub(crate) fn pointwise(metric: &dyn MetricField, u: &DiscreteField) -> Result<Pointwise> {
    let d = &u.domain;
    let nodes = par::map(d.len(), |p| -> Result<Option<NodeData>> {
        if !d.tags[p].is_active() {
            return Ok(None);
        }
        let Ok(jet) = u.jet(p) else { return Ok(None) };
        let f = node_frame(metric, d, p)?;
        let grad = f.gradient(&jet).norm;
        let hess_sq = f.hessian(&jet).norm_sq;
        let scalar = frame(metric, d.positions[p])?.scalar_curvature();
        Ok(Some(NodeData {
            jet,
            frame: f,
            grad,
            hess_sq,
            scalar,
        }))
    });
    let nodes: Vec<Option<NodeData>> = nodes.into_iter().collect::<Result<_>>()?;
    let skipped = (0..d.len())
        .filter(|&p| d.tags[p].is_active() && nodes[p].is_none())
        .count();
    Ok(Pointwise { nodes, skipped })
}

/// The height function `x3` as a jet in the chart variables at node `p`.
pub(crate) fn height_jet(u: &DiscreteField, p: usize) -> Jet {
    let d = &u.domain;
    d.chart.position(&Jet::point(d.xi(p)))[2]
}
