use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::metric::{MetricComponents, Sym3};

/// Polar cone half-angle excluded from spherical charts.
pub const THETA_MIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialMap {
    /// First chart coordinate is `r`.
    Linear,
    /// First chart coordinate is `ln r`.
    Log,
}

/// Coordinate chart `ξ ↦ x` over the half-space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Chart {
    /// `x_i = ℓ sinh(ξ_i / ℓ)` when stretched, identity otherwise.
    Cartesian { stretch: Option<f64> },
    /// `x = c + r (sinθ cosϕ, sinθ sinϕ, cosθ)` with `ξ = (r or ln r, θ, ϕ)`.
    Spherical { center: [f64; 3], radial: RadialMap },
}

impl Chart {
    pub const IDENTITY: Chart = Chart::Cartesian { stretch: None };

    /// Physical position as jets in the chart variables carried by `xi`.
    pub fn position(&self, xi: &[Jet; 3]) -> [Jet; 3] {
        match *self {
            Chart::Cartesian { stretch: None } => *xi,
            Chart::Cartesian { stretch: Some(l) } => {
                [0, 1, 2].map(|i| xi[i].scale(1.0 / l).sinh().scale(l))
            }
            Chart::Spherical { center, radial } => {
                let r = radius(radial, xi[0]);
                let (st, ct) = (xi[1].sin(), xi[1].cos());
                let (sp, cp) = (xi[2].sin(), xi[2].cos());
                [
                    r * st * cp + center[0],
                    r * st * sp + center[1],
                    r * ct + center[2],
                ]
            }
        }
    }

    /// `J[i][a] = ∂x^i/∂ξ^a` as jets in the chart variables carried by `xi`.
    pub fn jacobian(&self, xi: &[Jet; 3]) -> [[Jet; 3]; 3] {
        let z = Jet::ZERO;
        match *self {
            Chart::Cartesian { stretch: None } => {
                [[Jet::ONE, z, z], [z, Jet::ONE, z], [z, z, Jet::ONE]]
            }
            Chart::Cartesian { stretch: Some(l) } => {
                let c = [0, 1, 2].map(|i| xi[i].scale(1.0 / l).cosh());
                [[c[0], z, z], [z, c[1], z], [z, z, c[2]]]
            }
            Chart::Spherical { radial, .. } => {
                let r = radius(radial, xi[0]);
                let dr = match radial {
                    RadialMap::Linear => Jet::ONE,
                    RadialMap::Log => r,
                };
                let (st, ct) = (xi[1].sin(), xi[1].cos());
                let (sp, cp) = (xi[2].sin(), xi[2].cos());
                [
                    [dr * st * cp, r * ct * cp, -(r * st * sp)],
                    [dr * st * sp, r * ct * sp, r * st * cp],
                    [dr * ct, -(r * st), z],
                ]
            }
        }
    }

    pub fn to_cartesian(&self, xi: [f64; 3]) -> [f64; 3] {
        self.position(&Jet::constant_point(xi)).map(|j| j.v)
    }

    /// Rejects chart points inside the excluded polar cone.
    pub fn check(&self, xi: [f64; 3]) -> Result<()> {
        if let Chart::Spherical { .. } = self {
            if xi[1] < THETA_MIN || xi[1] > PI - THETA_MIN {
                return Err(Error::Domain(alloc::format!(
                    "polar angle {} lies in the excluded cone θ < {THETA_MIN}",
                    xi[1]
                )));
            }
        }
        Ok(())
    }
}

fn radius(radial: RadialMap, rho: Jet) -> Jet {
    match radial {
        RadialMap::Linear => rho,
        RadialMap::Log => rho.exp(),
    }
}

/// Pullback `ĝ_ab = J^i_a J^j_b g_ij(x(ξ))` of a Cartesian metric to a chart.
pub struct ChartMetric<'a, M: ?Sized> {
    pub metric: &'a M,
    pub chart: Chart,
}

pub fn chart_transform<M: MetricComponents + ?Sized>(
    metric: &M,
    chart: Chart,
) -> ChartMetric<'_, M> {
    ChartMetric { metric, chart }
}

impl<M: MetricComponents + ?Sized> ChartMetric<'_, M> {
    /// Cartesian partials of a chart scalar are not needed; this maps a chart
    /// point to physical coordinates.
    pub fn position(&self, xi: [f64; 3]) -> [f64; 3] {
        self.chart.to_cartesian(xi)
    }
}

impl<M: MetricComponents + ?Sized> MetricComponents for ChartMetric<'_, M> {
    fn components(&self, xi: &[Jet; 3]) -> Sym3 {
        if let Chart::Cartesian { stretch: None } = self.chart {
            return self.metric.components(xi);
        }
        let x = self.chart.position(xi);
        let g = self.metric.components(&x);
        let jac = self.chart.jacobian(xi);
        // t[i][b] = g_ij J^j_b
        let mut t = [[Jet::ZERO; 3]; 3];
        for i in 0..3 {
            for b in 0..3 {
                let mut acc = Jet::ZERO;
                for j in 0..3 {
                    if jac[j][b] != Jet::ZERO {
                        acc += g[i][j] * jac[j][b];
                    }
                }
                t[i][b] = acc;
            }
        }
        let mut out = [[Jet::ZERO; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let mut acc = Jet::ZERO;
                for i in 0..3 {
                    if jac[i][a] != Jet::ZERO {
                        acc += jac[i][a] * t[i][b];
                    }
                }
                out[a][b] = acc;
                out[b][a] = acc;
            }
        }
        out
    }

    fn check_point(&self, xi: [f64; 3]) -> Result<()> {
        self.chart.check(xi)?;
        self.metric.check_point(self.chart.to_cartesian(xi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::frame;
    use crate::metric::{make_flat, make_half_schwarzschild, MetricField};

    fn spherical(radial: RadialMap) -> Chart {
        Chart::Spherical {
            center: [0.0; 3],
            radial,
        }
    }

    #[test]
    fn flat_pullback_is_spherical_metric() {
        let flat = make_flat();
        let cm = chart_transform(&flat, spherical(RadialMap::Linear));
        let (r, th) = (2.5, 0.7);
        let g = cm.components(&Jet::constant_point([r, th, 1.1]));
        let s = th.sin();
        let expect = [1.0, r * r, r * r * s * s];
        for a in 0..3 {
            for b in 0..3 {
                let e = if a == b { expect[a] } else { 0.0 };
                assert!((g[a][b].v - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn conformal_pullback_scales() {
        let m = make_half_schwarzschild(1.0).unwrap();
        let cm = chart_transform(&m, spherical(RadialMap::Linear));
        let (r, th) = (1.7, 1.2);
        let xi = [r, th, 0.4];
        let x = cm.position(xi);
        let phi4 = m
            .conformal_factor(&Jet::constant_point(x))
            .unwrap()
            .v
            .powi(4);
        let g = cm.components(&Jet::constant_point(xi));
        let s = th.sin();
        assert!((g[0][0].v - phi4).abs() < 1e-13);
        assert!((g[1][1].v - phi4 * r * r).abs() < 1e-12);
        assert!((g[2][2].v - phi4 * r * r * s * s).abs() < 1e-12);
    }

    #[test]
    fn scalar_curvature_is_chart_invariant() {
        let m = crate::metric::make_perturbed_flat(0.2, 0.8, 9).unwrap();
        for radial in [RadialMap::Linear, RadialMap::Log] {
            let chart = spherical(radial);
            let cm = chart_transform(&m, chart);
            for (r, th, ph) in [(1.5, 0.6, 0.3), (3.0, 1.2, 4.0), (0.8, 0.2, 2.0)] {
                let rho = match radial {
                    RadialMap::Linear => r,
                    RadialMap::Log => f64::ln(r),
                };
                let xi = [rho, th, ph];
                let x = chart.to_cartesian(xi);
                let a = frame(&m, x).unwrap().scalar_curvature();
                let b = frame(&cm, xi).unwrap().scalar_curvature();
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn polar_cone_is_rejected() {
        let flat = make_flat();
        let cm = chart_transform(&flat, spherical(RadialMap::Log));
        assert!(cm.check_point([0.0, 1e-4, 0.0]).is_err());
        assert!(cm.check_point([0.0, 0.5, 0.0]).is_ok());
    }

    #[test]
    fn stretched_cartesian_round_trip() {
        let c = Chart::Cartesian { stretch: Some(3.0) };
        let x = c.to_cartesian([1.0, -2.0, 0.5]);
        assert!((x[0] - 3.0 * (1.0f64 / 3.0).sinh()).abs() < 1e-15);
        let flat = make_flat();
        let cm = chart_transform(&flat, c);
        let g = cm.components(&Jet::point([1.0, -2.0, 0.5]));
        let c0 = (1.0f64 / 3.0).cosh();
        assert!((g[0][0].v - c0 * c0).abs() < 1e-14);
        assert_eq!(g[0][1].v, 0.0);
    }
}
