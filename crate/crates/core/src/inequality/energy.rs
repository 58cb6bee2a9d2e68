use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{boundary_mean_curvature, scalar_curvature};
use crate::metric::MetricField;
use crate::par;
use crate::solver::{Domain, Tag};

/// Values above `-ENERGY_TOLERANCE` count as nonnegative.
pub const ENERGY_TOLERANCE: f64 = 1e-8;

/// Sampled minima of `R_g` over the domain and of `H_g` over the boundary
/// plane.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnergySample {
    pub min_scalar: f64,
    pub min_mean: f64,
    pub bulk_points: usize,
    pub boundary_points: usize,
}

impl EnergySample {
    pub fn satisfied(&self) -> bool {
        self.min_scalar >= -ENERGY_TOLERANCE && self.min_mean >= -ENERGY_TOLERANCE
    }
}

/// Samples every active node (and every boundary-plane node for `H_g`) plus
/// `random` uniform chart points and their projections onto `{x3 = 0}`.
pub fn sample_energy_conditions(
    metric: &dyn MetricField,
    domain: &Domain,
    random: usize,
    seed: u64,
) -> Result<EnergySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extent = domain.axes.map(|a| {
        let lo = if a.half_cell_lo { a.start - 0.5 * a.step } else { a.start };
        let n = if a.periodic { a.len } else { a.len - 1 };
        (lo, a.start + n as f64 * a.step)
    });
    let mut extra = alloc::vec::Vec::with_capacity(random);
    while extra.len() < random {
        let xi = [0, 1, 2].map(|a| rng.random_range(extent[a].0..=extent[a].1));
        if domain.chart.check(xi).is_err() {
            continue;
        }
        let x = domain.chart.to_cartesian(xi);
        if x[2] < 0.0 || metric.excisions().iter().any(|e| e.contains(x)) {
            continue;
        }
        extra.push(x);
    }
    let inside = |x: [f64; 3]| !metric.excisions().iter().any(|e| e.contains(x));

    let n = domain.len();
    let bulk: Result<alloc::vec::Vec<f64>> = par::map(n + random, |i| {
        if i < n {
            if !domain.tags[i].is_active() {
                return Ok(f64::INFINITY);
            }
            scalar_curvature(metric, domain.positions[i])
        } else {
            scalar_curvature(metric, extra[i - n])
        }
    })
    .into_iter()
    .collect();
    let bulk = bulk?;
    let boundary: Result<alloc::vec::Vec<f64>> = par::map(n + random, |i| {
        let x = if i < n {
            if domain.tags[i] != Tag::Sigma {
                return Ok(f64::INFINITY);
            }
            domain.positions[i]
        } else {
            let e = extra[i - n];
            [e[0], e[1], 0.0]
        };
        if !inside(x) {
            return Ok(f64::INFINITY);
        }
        boundary_mean_curvature(metric, x)
    })
    .into_iter()
    .collect();
    let boundary = boundary?;
    Ok(EnergySample {
        min_scalar: bulk.iter().copied().fold(f64::INFINITY, f64::min),
        min_mean: boundary.iter().copied().fold(f64::INFINITY, f64::min),
        bulk_points: bulk.iter().filter(|v| v.is_finite()).count(),
        boundary_points: boundary.iter().filter(|v| v.is_finite()).count(),
    })
}
