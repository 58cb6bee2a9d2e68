//! Mass by flux quadrature over hemispheres, spheres and half-cylinders, and
//! extrapolation of the finite-radius values to infinity.
//!
//! All surfaces, normals and measures are Euclidean in the asymptotic chart.
//! The flux integrand is `ω_i ν^i` with `ω_i = g_ij,j - g_jj,i`, and the
//! boundary circle contributes `g_α3 ϑ^α` with `ϑ` the outward co-normal of
//! the circle inside `{x3 = 0}`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::math;
use crate::metric::{Doubled, MetricComponents, MetricField, MetricSample};
use crate::par;
use crate::quadrature::{periodic, trapezoid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Exhaustion {
    Hemisphere,
    Sphere,
    HalfCylinder,
}

impl Exhaustion {
    pub fn as_str(self) -> &'static str {
        match self {
            Exhaustion::Hemisphere => "hemisphere",
            Exhaustion::Sphere => "sphere",
            Exhaustion::HalfCylinder => "half-cylinder",
        }
    }
}

/// Panel counts. `n_polar` panels span a quarter turn in the polar angle (and
/// the radius and height on half-cylinders); `n_azimuth` nodes span a full turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MassQuadrature {
    pub n_polar: usize,
    pub n_azimuth: usize,
}

impl MassQuadrature {
    pub fn with_resolution(n: usize) -> Self {
        MassQuadrature {
            n_polar: n.max(4),
            n_azimuth: (n / 16).max(16),
        }
    }
}

impl Default for MassQuadrature {
    fn default() -> Self {
        MassQuadrature::with_resolution(1024)
    }
}

const FLUX_NORMALIZATION: f64 = 1.0 / (16.0 * PI);

fn omega(s: &MetricSample) -> [f64; 3] {
    let mut w = [0.0; 3];
    for (i, wi) in w.iter_mut().enumerate() {
        for j in 0..3 {
            *wi += s.dg[j][i][j] - s.dg[i][j][j];
        }
    }
    w
}

fn flux_at<M: MetricComponents + ?Sized>(metric: &M, x: [f64; 3], normal: [f64; 3]) -> Result<f64> {
    metric.check_point(x)?;
    let w = omega(&MetricSample::from_components(
        &metric.components(&Jet::point(x)),
    ));
    Ok(w[0] * normal[0] + w[1] * normal[1] + w[2] * normal[2])
}

/// Sums `f` over a tensor-product rule, in parallel with fixed order.
fn tensor_sum<F>(outer: &[(f64, f64)], inner: &[(f64, f64)], f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync + Send,
{
    let m = inner.len();
    let terms = par::map(outer.len() * m, |k| {
        let (a, wa) = outer[k / m];
        let (b, wb) = inner[k % m];
        f(a, b).map(|v| v * wa * wb)
    });
    let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
    Ok(par::pairwise_sum(&terms))
}

fn circle_term(metric: &dyn MetricField, r: f64, q: MassQuadrature) -> Result<f64> {
    let nodes = periodic(0.0, 2.0 * PI, q.n_azimuth);
    let terms = par::map(nodes.len(), |k| {
        let (ph, w) = nodes[k];
        let (s, c) = (math::sin(ph), math::cos(ph));
        let g = metric.eval([r * c, r * s, 0.0])?;
        Ok(w * r * (g[0][2] * c + g[1][2] * s))
    });
    let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
    Ok(par::pairwise_sum(&terms))
}

fn check_clear(
    metric: &dyn MetricField,
    size: f64,
    reach: impl Fn(&[f64; 3], f64) -> f64,
) -> Result<()> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "surface size must be positive, got {size}"
        )));
    }
    for e in metric.excisions() {
        if reach(&e.center, e.radius) >= size {
            return Err(Error::SurfaceMeetsExcision { size });
        }
    }
    Ok(())
}

fn sphere_reach(c: &[f64; 3], rho: f64) -> f64 {
    math::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) + rho
}

fn spherical_flux<M: MetricComponents + ?Sized>(
    metric: &M,
    r: f64,
    theta_max: f64,
    panels: usize,
    q: MassQuadrature,
) -> Result<f64> {
    let polar = trapezoid(0.0, theta_max, panels);
    let azimuth = periodic(0.0, 2.0 * PI, q.n_azimuth);
    tensor_sum(&polar, &azimuth, |th, ph| {
        let (st, ct) = (math::sin(th), math::cos(th));
        let mu = [st * math::cos(ph), st * math::sin(ph), ct];
        let x = [r * mu[0], r * mu[1], r * mu[2]];
        Ok(flux_at(metric, x, mu)? * r * r * st)
    })
}

/// Flux over the coordinate hemisphere of radius `r` plus the boundary circle term.
pub fn mass_hemisphere(metric: &dyn MetricField, r: f64, q: MassQuadrature) -> Result<f64> {
    check_clear(metric, r, sphere_reach)?;
    let bulk = spherical_flux(metric, r, PI / 2.0, q.n_polar, q)?;
    let circle = circle_term(metric, r, q)?;
    Ok(FLUX_NORMALIZATION * (bulk + circle))
}

/// Full-sphere flux of the mirror-doubled metric.
pub fn mass_sphere(metric: &dyn MetricField, r: f64, q: MassQuadrature) -> Result<f64> {
    if !metric.mirror_symmetric() {
        return Err(Error::NotMirrorSymmetric);
    }
    check_clear(metric, r, sphere_reach)?;
    let doubled = Doubled(metric);
    Ok(FLUX_NORMALIZATION * spherical_flux(&doubled, r, PI, 2 * q.n_polar, q)?)
}

/// Flux over the half-cylinder of radius and height `l` (top disc and
/// tube) plus the circle term on its bottom edge.
pub fn mass_halfcylinder(metric: &dyn MetricField, l: f64, q: MassQuadrature) -> Result<f64> {
    check_clear(metric, l, |c, rho| {
        (math::sqrt(c[0] * c[0] + c[1] * c[1]) + rho).max(c[2] + rho)
    })?;
    let radial = trapezoid(0.0, l, q.n_polar);
    let azimuth = periodic(0.0, 2.0 * PI, q.n_azimuth);
    let top = tensor_sum(&radial, &azimuth, |s, ph| {
        let x = [s * math::cos(ph), s * math::sin(ph), l];
        Ok(flux_at(metric, x, [0.0, 0.0, 1.0])? * s)
    })?;
    let tube = tensor_sum(&radial, &azimuth, |z, ph| {
        let (sp, cp) = (math::sin(ph), math::cos(ph));
        Ok(flux_at(metric, [l * cp, l * sp, z], [cp, sp, 0.0])? * l)
    })?;
    let circle = circle_term(metric, l, q)?;
    Ok(FLUX_NORMALIZATION * (top + tube + circle))
}

pub fn mass_at(
    metric: &dyn MetricField,
    shape: Exhaustion,
    size: f64,
    q: MassQuadrature,
) -> Result<f64> {
    match shape {
        Exhaustion::Hemisphere => mass_hemisphere(metric, size, q),
        Exhaustion::Sphere => mass_sphere(metric, size, q),
        Exhaustion::HalfCylinder => mass_halfcylinder(metric, size, q),
    }
}

/// Fit of `v(r) = m + c r^{-p}`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Extrapolation {
    pub mass: f64,
    /// Decay exponent; `+inf` for a constant sequence.
    pub order: f64,
    /// RMS misfit of the samples.
    pub residual: f64,
    /// False when the tail is not monotone or the fitted exponent is not
    /// positive; `mass` is then the last sample and `residual` the spread of
    /// the tail.
    pub converged: bool,
}

pub fn extrapolate(samples: &[(f64, f64)]) -> Result<Extrapolation> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::TooFewSamples(n));
    }
    if samples.iter().any(|s| !(s.0 > 0.0)) || samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::NonIncreasingRadii);
    }
    if samples.iter().any(|s| !s.1.is_finite()) {
        return Err(Error::Domain("non-finite mass sample".into()));
    }
    let last = samples[n - 1].1;
    let scale = samples.iter().fold(1.0f64, |m, s| m.max(math::abs(s.1)));
    let diffs: Vec<f64> = samples.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let spread = diffs.iter().fold(0.0f64, |m, d| m.max(math::abs(*d)));
    if spread <= 64.0 * f64::EPSILON * scale {
        let rms = rms(samples.iter().map(|s| s.1 - last));
        return Ok(Extrapolation {
            mass: last,
            order: f64::INFINITY,
            residual: rms,
            converged: true,
        });
    }
    let unconverged = |order: f64| Extrapolation {
        mass: last,
        order,
        residual: spread,
        converged: false,
    };
    let monotone = diffs.iter().all(|d| *d > 0.0) || diffs.iter().all(|d| *d < 0.0);
    if !monotone {
        return Ok(unconverged(f64::NAN));
    }
    let xs: Vec<f64> = samples[..n - 1].iter().map(|s| math::ln(s.0)).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| math::ln(math::abs(*d))).collect();
    let p = -linear_fit(&xs, &ys).1;
    if !(p > 0.0 && p.is_finite()) {
        return Ok(unconverged(p));
    }
    let basis: Vec<f64> = samples.iter().map(|s| math::powf(s.0, -p)).collect();
    let vals: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let (m, c) = linear_fit(&basis, &vals);
    let residual = rms(basis.iter().zip(&vals).map(|(b, v)| v - (m + c * b)));
    Ok(Extrapolation {
        mass: m,
        order: p,
        residual,
        converged: true,
    })
}

/// Least-squares `y ≈ a + b x`, returns `(a, b)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut k) = (0.0, 0usize);
    for v in it {
        s += v * v;
        k += 1;
    }
    math::sqrt(s / k.max(1) as f64)
}

/// `r0 · 2^k` for `k < count`, with `r0` the larger of `floor` and four
/// times the reach of the farthest excision.
pub fn default_radii(metric: &dyn MetricField, floor: f64, count: usize) -> Vec<f64> {
    let reach = metric
        .excisions()
        .iter()
        .map(|e| sphere_reach(&e.center, e.radius))
        .fold(0.0f64, f64::max);
    let r0 = floor.max(4.0 * reach);
    (0..count).map(|k| r0 * (1u64 << k) as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MassReport {
    pub shape: Exhaustion,
    pub samples: Vec<(f64, f64)>,
    pub fit: Extrapolation,
}

impl MassReport {
    pub fn mass(&self) -> f64 {
        self.fit.mass
    }
}

/// Finite-size values over `sizes` and their extrapolation.
pub fn mass_study(
    metric: &dyn MetricField,
    shape: Exhaustion,
    sizes: &[f64],
    q: MassQuadrature,
) -> Result<MassReport> {
    let mut samples = Vec::with_capacity(sizes.len());
    for &s in sizes {
        samples.push((s, mass_at(metric, shape, s, q)?));
    }
    let fit = extrapolate(&samples)?;
    Ok(MassReport {
        shape,
        samples,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{make_flat, make_half_schwarzschild};

    #[test]
    fn flat_has_zero_flux() {
        let q = MassQuadrature::with_resolution(64);
        let f = make_flat();
        assert_eq!(mass_hemisphere(&f, 5.0, q).unwrap(), 0.0);
        assert_eq!(mass_sphere(&f, 5.0, q).unwrap(), 0.0);
        assert_eq!(mass_halfcylinder(&f, 5.0, q).unwrap(), 0.0);
    }

    #[test]
    fn surfaces_must_clear_excision() {
        let g = make_half_schwarzschild(1.0).unwrap();
        let q = MassQuadrature::with_resolution(16);
        assert_eq!(
            mass_hemisphere(&g, 0.4, q),
            Err(Error::SurfaceMeetsExcision { size: 0.4 })
        );
        assert!(mass_halfcylinder(&g, 0.5, q).is_err());
    }

    #[test]
    fn extrapolation_preconditions() {
        assert_eq!(
            extrapolate(&[(1.0, 1.0), (2.0, 1.0)]),
            Err(Error::TooFewSamples(2))
        );
        assert_eq!(
            extrapolate(&[(1.0, 1.0), (1.0, 1.0), (2.0, 1.0)]),
            Err(Error::NonIncreasingRadii)
        );
        let c = extrapolate(&[(1.0, 0.3), (2.0, 0.3), (4.0, 0.3)]).unwrap();
        assert_eq!(c.mass, 0.3);
        assert_eq!(c.residual, 0.0);
        let osc = extrapolate(&[(1.0, 0.3), (2.0, 0.4), (4.0, 0.35), (8.0, 0.5)]).unwrap();
        assert!(!osc.converged);
    }

    #[test]
    fn extrapolation_recovers_power_law() {
        let s: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&r| (r, 2.0 - 3.0 * f64::powf(r, -1.5)))
            .collect();
        let e = extrapolate(&s).unwrap();
        assert!((e.mass - 2.0).abs() < 1e-12);
        assert!((e.order - 1.5).abs() < 1e-12);
    }
}
