//! Both sides of the harmonic-level-set mass estimate
//! `m ≥ (1/16π) ∫ (|∇²u|²/|∇u| + R|∇u|) dV + (1/8π) ∫_Σ H|∇u| dA`,
//! with the pointwise and level-set facts behind it.

mod coarea;
mod energy;
mod integrals;
mod levels;
mod pointwise;

use alloc::vec::Vec;

pub use coarea::{coarea_check, CoareaReport, LevelArea, ISO_LEVELS, SLAB_BINS};
pub use energy::{sample_energy_conditions, EnergySample, ENERGY_TOLERANCE};
pub use integrals::{
    boundary_integral, bulk_integral, normal_derivative_identity, BulkIntegral, IdentityDefect,
    EPSILON_FRACTION,
};
pub use levels::{level_connectedness, LevelComponents};
pub use pointwise::NodeData;

use crate::error::Result;
use crate::mass::{mass_study, Exhaustion, MassQuadrature, MassReport};
use crate::math;
use crate::metric::MetricField;
use crate::solver::{
    assemble, build_domain, min_gradient_on_sigma, residual, solve, DiscreteField, Domain,
    Truncation,
};

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityConfig {
    /// Per-axis node counts of the production grid.
    pub nodes: [usize; 3],
    pub truncation: Truncation,
    pub solver_tol: f64,
    /// Hemisphere radii for the mass extrapolation.
    pub radii: Vec<f64>,
    pub quadrature: MassQuadrature,
    pub energy_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Verdict {
    Pass,
    Fail,
    /// Sampled energy conditions failed; the estimate does not apply.
    Skipped,
}

/// Contributions to the tolerance on the estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Tolerance {
    /// Residual of the mass extrapolation.
    pub fit: f64,
    /// `|Δ(B + S)|` between the production grid and one with half the nodes.
    pub refinement: f64,
    /// `|Δ(B + S)|` between the half grid and the same spacing on a domain
    /// twice as large.
    pub truncation: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InequalityReport {
    pub mass: MassReport,
    pub bulk: BulkIntegral,
    pub boundary: f64,
    /// `m - (B + S)`.
    pub slack: f64,
    pub tolerance: Tolerance,
    pub verdict: Verdict,
    pub energy: EnergySample,
    pub residual: f64,
    pub min_gradient: f64,
    pub identity: IdentityDefect,
    pub coarea: CoareaReport,
    pub levels: Vec<LevelComponents>,
    pub iterations: usize,
    pub unknowns: usize,
}

impl InequalityReport {
    pub fn rhs(&self) -> f64 {
        self.bulk.value + self.boundary
    }
}

/// Solution and both integrals at one grid.
pub struct Evaluation {
    pub field: DiscreteField,
    pub bulk: BulkIntegral,
    pub boundary: f64,
    pw: pointwise::Pointwise,
}

pub fn evaluate(metric: &dyn MetricField, nodes: [usize; 3], truncation: Truncation, tol: f64) -> Result<Evaluation> {
    let domain = build_domain(metric, nodes, truncation)?;
    let field = solve(&assemble(metric, &domain)?, tol)?;
    let pw = pointwise::pointwise(metric, &field)?;
    Ok(Evaluation {
        bulk: integrals::bulk_from(&pw, &field),
        boundary: integrals::boundary_from(&pw, &field),
        field,
        pw,
    })
}

impl Evaluation {
    pub fn rhs(&self) -> f64 {
        self.bulk.value + self.boundary
    }

    pub fn identity(&self) -> IdentityDefect {
        integrals::identity_from(&self.pw, &self.field)
    }

    pub fn coarea(&self, f: &(dyn Fn([f64; 3]) -> f64 + Sync)) -> Result<CoareaReport> {
        coarea::coarea_from(&self.pw, &self.field, f)
    }
}

/// Node counts with half as many cells along every axis.
pub fn coarsen(nodes: [usize; 3]) -> [usize; 3] {
    nodes.map(|n| n.div_ceil(2))
}

/// The same grid spacing on a domain twice as large.
pub fn extend(domain: &Domain, nodes: [usize; 3]) -> ([usize; 3], Truncation) {
    let scale = |n: usize, ratio: f64| (math::round((n - 1) as f64 * ratio) as usize) + 1;
    match domain.truncation {
        Truncation::Shell { r_out } => {
            let r_in = math::exp(domain.axes[0].start);
            let ratio = math::ln(2.0 * r_out / r_in) / math::ln(r_out / r_in);
            (
                [scale(nodes[0], ratio), nodes[1], nodes[2]],
                Truncation::Shell { r_out: 2.0 * r_out },
            )
        }
        Truncation::Box {
            half_width,
            height,
            stretch,
        } => {
            let xi = |x: f64| match stretch {
                Some(l) => l * math::asinh(x / l),
                None => x,
            };
            let lat = xi(2.0 * half_width) / xi(half_width);
            let ver = xi(2.0 * height) / xi(height);
            (
                [scale(nodes[0], lat), scale(nodes[1], lat), scale(nodes[2], ver)],
                Truncation::Box {
                    half_width: 2.0 * half_width,
                    height: 2.0 * height,
                    stretch,
                },
            )
        }
    }
}

/// Sample levels strictly inside the range of `u`, evenly spaced.
pub fn interior_levels(u: &DiscreteField, count: usize) -> Vec<f64> {
    let d = &u.domain;
    let (lo, hi) = (0..d.len())
        .filter(|&p| d.tags[p].is_active())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(u.values[p]), b.max(u.values[p]))
        });
    (1..=count)
        .map(|k| lo + k as f64 * (hi - lo) / (count + 1) as f64)
        .collect()
}

/// Full pipeline: energy sampling, production solve, integrals, mass
/// extrapolation, refinement and truncation comparisons.
pub fn check_inequality(metric: &dyn MetricField, config: &InequalityConfig) -> Result<InequalityReport> {
    let main = evaluate(metric, config.nodes, config.truncation, config.solver_tol)?;
    let domain = &main.field.domain;
    let energy = sample_energy_conditions(metric, domain, config.energy_samples, config.seed)?;
    let mass = mass_study(metric, Exhaustion::Hemisphere, &config.radii, config.quadrature)?;

    let coarse_nodes = coarsen(config.nodes);
    let coarse = evaluate(metric, coarse_nodes, config.truncation, config.solver_tol)?;
    let (ext_nodes, ext_trunc) = extend(domain, coarse_nodes);
    let extended = evaluate(metric, ext_nodes, ext_trunc, config.solver_tol)?;

    let rhs = main.rhs();
    let refinement = math::abs(rhs - coarse.rhs());
    let truncation = math::abs(extended.rhs() - coarse.rhs());
    let fit = mass.fit.residual;
    let tolerance = Tolerance {
        fit,
        refinement,
        truncation,
        total: fit + refinement + truncation,
    };
    let slack = mass.mass() - rhs;
    let verdict = if !energy.satisfied() {
        Verdict::Skipped
    } else if slack >= -tolerance.total {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let levels = level_connectedness(&main.field, &interior_levels(&main.field, ISO_LEVELS));
    Ok(InequalityReport {
        bulk: main.bulk,
        boundary: main.boundary,
        slack,
        tolerance,
        verdict,
        energy,
        residual: residual(metric, &main.field)?,
        min_gradient: min_gradient_on_sigma(metric, &main.field)?,
        identity: main.identity(),
        coarea: main.coarea(&|_| 1.0)?,
        levels,
        iterations: main.field.iterations,
        unknowns: domain.n_unknowns,
        mass,
    })
}
