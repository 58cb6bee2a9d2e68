//! Cross-checks of the analytic metric partials and the covariant operators
//! at random points.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{frame, quad};
use crate::convergence::{orders_from_errors, Order};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::math;
use crate::metric::{Mat3, MetricField};
use crate::par;

/// Sampling region and finite-difference step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeCheckConfig {
    pub points: usize,
    /// Points are drawn from `[-extent, extent]² × [step, extent]`.
    pub extent: f64,
    /// Coarse step `h`; the fine step is `h/2`.
    pub step: f64,
    /// Points closer than `margin · radius` to an excision center are redrawn.
    pub margin: f64,
    pub seed: u64,
}

impl Default for DerivativeCheckConfig {
    fn default() -> Self {
        DerivativeCheckConfig {
            points: 1000,
            extent: 8.0,
            step: 1e-2,
            margin: 1.5,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DerivativeReport {
    pub points: usize,
    /// RMS over points of the worst component error of centered differences
    /// of `g` against `∂g`, at steps `h` and `h/2`.
    pub first: [f64; 2],
    pub first_order: Order,
    /// Same for centered differences of `∂g` against `∂∂g`.
    pub second: [f64; 2],
    pub second_order: Order,
    /// Worst `|g^{ij}(∇²u)_ij - (1/√g)∂_i(√g g^{ij}∂_j u)|` over points.
    pub trace_defect: f64,
    /// Worst `||∇u|² - g(∇u, ∇u)|`.
    pub gradient_defect: f64,
    /// Worst `|(∇²u)_ij - (∇²u)_ji|`.
    pub hessian_asymmetry: f64,
    /// Worst `max |g^{ik} g_kj - δ^i_j|`.
    pub inverse_defect: f64,
}

impl DerivativeReport {
    pub fn passes(&self, min_order: f64, max_defect: f64) -> bool {
        self.first_order.at_least(min_order)
            && self.second_order.at_least(min_order)
            && self.trace_defect <= max_defect
            && self.gradient_defect <= max_defect
            && self.hessian_asymmetry <= max_defect
            && self.inverse_defect <= max_defect
    }
}

/// Smooth, non-polynomial test field for the operator identities.
pub fn test_field(x: &[Jet; 3]) -> Jet {
    (x[0] * x[1] * 0.3).sin() + x[2] * x[2] * x[0] * 0.1 + (x[1] * 0.2).exp() + x[2]
}

pub fn sample_points(metric: &dyn MetricField, config: &DerivativeCheckConfig) -> Result<Vec<[f64; 3]>> {
    if config.points == 0 || !(config.extent > config.step) || !(config.step > 0.0) {
        return Err(Error::InvalidParameter(
            "derivative check needs points > 0 and 0 < step < extent".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let e = config.extent;
    let mut out = Vec::with_capacity(config.points);
    let mut draws = 0usize;
    while out.len() < config.points {
        draws += 1;
        if draws > 1000 * config.points {
            return Err(Error::InvalidParameter(
                "sampling region is covered by excisions".into(),
            ));
        }
        let x = [
            rng.random_range(-e..=e),
            rng.random_range(-e..=e),
            rng.random_range(2.0 * config.step..=e),
        ];
        let near = metric.excisions().iter().any(|ex| {
            let d = [0, 1, 2].map(|a| x[a] - ex.center[a]);
            math::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) < config.margin * ex.radius
        });
        if near || metric.check_point(x).is_err() {
            continue;
        }
        out.push(x);
    }
    Ok(out)
}

struct PointErrors {
    first: [f64; 2],
    second: [f64; 2],
    trace: f64,
    gradient: f64,
    asymmetry: f64,
    inverse: f64,
}

fn max_diff(a: &Mat3, b: &Mat3) -> f64 {
    let mut m = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max(math::abs(a[i][j] - b[i][j]));
        }
    }
    m
}

fn shifted(x: [f64; 3], k: usize, d: f64) -> [f64; 3] {
    let mut y = x;
    y[k] += d;
    y
}

fn central(plus: &Mat3, minus: &Mat3, h: f64) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (plus[i][j] - minus[i][j]) / (2.0 * h);
        }
    }
    out
}

fn at_point(metric: &dyn MetricField, x: [f64; 3], h: f64) -> Result<PointErrors> {
    let s = metric.sample(x)?;
    let mut first = [0.0f64; 2];
    let mut second = [0.0f64; 2];
    for (slot, step) in [h, 0.5 * h].into_iter().enumerate() {
        for k in 0..3 {
            let p = metric.sample(shifted(x, k, step))?;
            let m = metric.sample(shifted(x, k, -step))?;
            first[slot] = first[slot].max(max_diff(&central(&p.g, &m.g, step), &s.dg[k]));
            for l in 0..3 {
                let fd = central(&p.dg[l], &m.dg[l], step);
                second[slot] = second[slot].max(max_diff(&fd, &s.d2g[k][l]));
            }
        }
    }

    let f = frame(metric, x)?;
    let u = test_field(&Jet::point(x));
    let grad = f.gradient(&u);
    let hess = f.hessian(&u);
    let trace = math::abs(f.trace(&hess.matrix) - f.laplacian_divergence_form(&u));
    let gradient = math::abs(grad.norm * grad.norm - quad(&f.g, &grad.vector));
    let mut asymmetry = 0.0f64;
    let mut inverse = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            asymmetry = asymmetry.max(math::abs(hess.matrix[i][j] - hess.matrix[j][i]));
            let id: f64 = (0..3).map(|k| f.g_inv[i][k] * f.g[k][j]).sum();
            let delta = if i == j { 1.0 } else { 0.0 };
            inverse = inverse.max(math::abs(id - delta));
        }
    }
    Ok(PointErrors {
        first,
        second,
        trace,
        gradient,
        asymmetry,
        inverse,
    })
}

fn rms(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        math::sqrt(s / n as f64)
    }
}

/// Finite-difference order of the analytic partials and the operator
/// identities at random points of the half-space.
pub fn derivative_check(metric: &dyn MetricField, config: &DerivativeCheckConfig) -> Result<DerivativeReport> {
    let pts = sample_points(metric, config)?;
    let errs: Result<Vec<PointErrors>> = par::map(pts.len(), |i| at_point(metric, pts[i], config.step))
        .into_iter()
        .collect();
    let errs = errs?;
    let agg = |f: &dyn Fn(&PointErrors) -> f64| rms(errs.iter().map(f));
    let worst = |f: &dyn Fn(&PointErrors) -> f64| errs.iter().map(f).fold(0.0f64, f64::max);
    let first = [agg(&|e| e.first[0]), agg(&|e| e.first[1])];
    let second = [agg(&|e| e.second[0]), agg(&|e| e.second[1])];
    Ok(DerivativeReport {
        points: pts.len(),
        first,
        first_order: orders_from_errors(&first)[0],
        second,
        second_order: orders_from_errors(&second)[0],
        trace_defect: worst(&|e| e.trace),
        gradient_defect: worst(&|e| e.gradient),
        hessian_asymmetry: worst(&|e| e.asymmetry),
        inverse_defect: worst(&|e| e.inverse),
    })
}
