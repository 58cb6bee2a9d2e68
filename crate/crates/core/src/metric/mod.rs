//! Closed-form asymptotically flat metrics on the half-space `{x3 >= 0}`.
//!
//! Every metric is written once in [`Jet`] arithmetic, which yields exact
//! first and second partials. Members of the zoo:
//!
//! * [`make_flat`]: the Euclidean metric,
//! * [`make_half_schwarzschild`]: `(1 + m/2r)^4 δ` with its horizon hemisphere,
//! * [`make_conformal_superposition`]: mirrored multi-bubble conformally flat data,
//! * [`make_perturbed_flat`]: `δ + h` with seeded decaying perturbations,
//! * [`Scaled`]: the homothety `g(x / λ)` of any member.

mod conformal;
mod flat;
mod perturbed;
mod transform;

use alloc::string::String;
use alloc::vec::Vec;

pub use conformal::{
    make_conformal_superposition, make_half_schwarzschild, Bubble, ConformalBubbleSpec,
    ConformalMetric,
};
pub use flat::{make_flat, Flat};
pub use perturbed::{make_perturbed_flat, PerturbedFlat};
pub use transform::{Doubled, Scaled};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::math;

/// Metric components as jets, `g[i][j]`.
pub type Sym3 = [[Jet; 3]; 3];

pub type Mat3 = [[f64; 3]; 3];

/// Anything that can produce metric components in some coordinates.
pub trait MetricComponents: Sync {
    /// Components `g_ij` at a point whose coordinates are given as jets.
    /// The derivative parts of the result follow the derivatives carried by `x`.
    fn components(&self, x: &[Jet; 3]) -> Sym3;

    /// Rejects points where the closed form is singular.
    fn check_point(&self, _x: [f64; 3]) -> Result<()> {
        Ok(())
    }
}

/// A horizon removed from the computational domain, stored as a coordinate
/// ball around `center` intersected with the half-space.
#[derive(Clone, Debug, PartialEq)]
pub struct Excision {
    pub center: [f64; 3],
    pub radius: f64,
    /// True when the ball only approximates the minimal surface.
    pub approximate: bool,
}

impl Excision {
    pub fn on_boundary(&self) -> bool {
        self.center[2] == 0.0
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        dist(x, self.center) < self.radius
    }
}

/// Point values of `g`, `∂_k g` and `∂_k ∂_l g` (indexed `dg[k][i][j]`,
/// `d2g[k][l][i][j]`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSample {
    pub g: Mat3,
    pub dg: [Mat3; 3],
    pub d2g: [[Mat3; 3]; 3],
}

impl MetricSample {
    pub fn from_components(c: &Sym3) -> Self {
        let mut s = MetricSample {
            g: [[0.0; 3]; 3],
            dg: [[[0.0; 3]; 3]; 3],
            d2g: [[[[0.0; 3]; 3]; 3]; 3],
        };
        for i in 0..3 {
            for j in 0..3 {
                s.g[i][j] = c[i][j].v;
                for k in 0..3 {
                    s.dg[k][i][j] = c[i][j].d[k];
                    for l in 0..3 {
                        s.d2g[k][l][i][j] = c[i][j].h[k][l];
                    }
                }
            }
        }
        s
    }
}

/// An asymptotically flat metric on the half-space.
pub trait MetricField: MetricComponents + Send {
    fn name(&self) -> String;

    /// Decay rate τ; `f64::INFINITY` for the flat metric.
    fn decay_rate(&self) -> f64;

    /// Invariance under `x3 -> -x3`.
    fn mirror_symmetric(&self) -> bool;

    fn excisions(&self) -> &[Excision];

    /// `φ` with `g = φ^4 δ`, when the metric is conformally flat.
    fn conformal_factor(&self, _x: &[Jet; 3]) -> Option<Jet> {
        None
    }

    /// False for families whose energy conditions are not guaranteed.
    fn energy_conditions_verified(&self) -> bool {
        true
    }

    fn sample(&self, x: [f64; 3]) -> Result<MetricSample> {
        self.check_point(x)?;
        Ok(MetricSample::from_components(
            &self.components(&Jet::point(x)),
        ))
    }

    fn eval(&self, x: [f64; 3]) -> Result<Mat3> {
        Ok(self.sample(x)?.g)
    }

    fn eval_partial(&self, x: [f64; 3], k: usize) -> Result<Mat3> {
        Ok(self.sample(x)?.dg[k])
    }

    fn eval_partial2(&self, x: [f64; 3], k: usize, l: usize) -> Result<Mat3> {
        Ok(self.sample(x)?.d2g[k][l])
    }
}

impl<T: MetricComponents + ?Sized> MetricComponents for &T {
    fn components(&self, x: &[Jet; 3]) -> Sym3 {
        (**self).components(x)
    }
    fn check_point(&self, x: [f64; 3]) -> Result<()> {
        (**self).check_point(x)
    }
}

impl<T: MetricComponents + ?Sized> MetricComponents for alloc::boxed::Box<T> {
    fn components(&self, x: &[Jet; 3]) -> Sym3 {
        (**self).components(x)
    }
    fn check_point(&self, x: [f64; 3]) -> Result<()> {
        (**self).check_point(x)
    }
}

impl<T: MetricField + ?Sized> MetricField for alloc::boxed::Box<T> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn decay_rate(&self) -> f64 {
        (**self).decay_rate()
    }
    fn mirror_symmetric(&self) -> bool {
        (**self).mirror_symmetric()
    }
    fn excisions(&self) -> &[Excision] {
        (**self).excisions()
    }
    fn conformal_factor(&self, x: &[Jet; 3]) -> Option<Jet> {
        (**self).conformal_factor(x)
    }
    fn energy_conditions_verified(&self) -> bool {
        (**self).energy_conditions_verified()
    }
}

/// Scaled deviations `(r^τ |g - δ|, r^{1+τ} |∂g|, r^{2+τ} |∂²g|)` along the ray
/// `t ↦ t·dir` at each radius, with max-norms over components.
pub fn decay_profile(
    metric: &dyn MetricField,
    dir: [f64; 3],
    radii: &[f64],
) -> Result<Vec<[f64; 3]>> {
    let tau = metric.decay_rate();
    let n = norm(dir);
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let x = [r * dir[0] / n, r * dir[1] / n, r * dir[2] / n];
        let s = metric.sample(x)?;
        let mut e0: f64 = 0.0;
        let mut e1: f64 = 0.0;
        let mut e2: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                e0 = e0.max(math::abs(s.g[i][j] - delta));
                for k in 0..3 {
                    e1 = e1.max(math::abs(s.dg[k][i][j]));
                    for l in 0..3 {
                        e2 = e2.max(math::abs(s.d2g[k][l][i][j]));
                    }
                }
            }
        }
        let w = if tau.is_finite() {
            math::powf(r, tau)
        } else {
            1.0
        };
        out.push([e0 * w, e1 * w * r, e2 * w * r * r]);
    }
    Ok(out)
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    math::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
}

pub(crate) fn check_positive(c: &Sym3, x: [f64; 3]) -> Result<()> {
    let g = |i: usize, j: usize| c[i][j].v;
    let m1 = g(0, 0);
    let m2 = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    let m3 = crate::geometry::det3(&[
        [g(0, 0), g(0, 1), g(0, 2)],
        [g(1, 0), g(1, 1), g(1, 2)],
        [g(2, 0), g(2, 1), g(2, 2)],
    ]);
    if m1 > 0.0 && m2 > 0.0 && m3 > 0.0 {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite(x))
    }
}

pub(crate) fn diagonal(f: Jet) -> Sym3 {
    let z = Jet::ZERO;
    [[f, z, z], [z, f, z], [z, z, f]]
}
