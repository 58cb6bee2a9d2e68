//! Pointwise tensor calculus for a metric given by its components and exact
//! partials, in whatever coordinates the components are expressed.
//!
//! Scalar fields enter as [`Jet`]s (value, coordinate gradient, coordinate
//! Hessian), so analytic fields and finite-difference samples of grid fields
//! go through the same code.

mod chart;
mod validate;

pub use chart::{chart_transform, Chart, ChartMetric, RadialMap, THETA_MIN};
pub use validate::{
    derivative_check, sample_points, test_field, DerivativeCheckConfig, DerivativeReport,
};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::math;
use crate::metric::{Mat3, MetricComponents, MetricSample};

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse and determinant; `None` when the determinant is not positive.
pub fn inv3(m: &Mat3) -> Option<(Mat3, f64)> {
    let det = det3(m);
    if !(det > 0.0) || !det.is_finite() {
        return None;
    }
    let r = 1.0 / det;
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * r;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * r;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * r;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * r;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * r;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * r;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * r;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * r;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * r;
    // Exact symmetry for symmetric input.
    for i in 0..3 {
        for j in (i + 1)..3 {
            let s = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = s;
            inv[j][i] = s;
        }
    }
    Some((inv, det))
}

/// `Γ^k_ij`, stored as `gamma[k][i][j]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Christoffel(pub [[[f64; 3]; 3]; 3]);

/// Metric, inverse, volume density and connection at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointFrame {
    pub g: Mat3,
    pub g_inv: Mat3,
    pub sqrt_det: f64,
    pub gamma: Christoffel,
    pub dg: [Mat3; 3],
    pub d2g: [[Mat3; 3]; 3],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gradient {
    /// Contravariant components `g^{ij} ∂_j u`.
    pub vector: [f64; 3],
    pub norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hessian {
    /// Covariant components `∂_i∂_j u - Γ^k_ij ∂_k u`.
    pub matrix: Mat3,
    /// `g^{ia} g^{jb} H_ij H_ab`.
    pub norm_sq: f64,
}

impl PointFrame {
    pub fn from_sample(s: &MetricSample, x: [f64; 3]) -> Result<Self> {
        let (g_inv, det) = inv3(&s.g).ok_or(Error::SingularMetric(x))?;
        let mut gamma = [[[0.0; 3]; 3]; 3];
        let first = first_kind(&s.dg);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for l in 0..3 {
                        acc += g_inv[k][l] * first[l][i][j];
                    }
                    gamma[k][i][j] = acc;
                }
            }
        }
        Ok(PointFrame {
            g: s.g,
            g_inv,
            sqrt_det: math::sqrt(det),
            gamma: Christoffel(gamma),
            dg: s.dg,
            d2g: s.d2g,
        })
    }

    /// Frame of a metric at a point given only by component values; partials
    /// are taken as zero. Used where only `g`, `g^{-1}` and `√g` matter.
    pub fn from_values(g: &Mat3, x: [f64; 3]) -> Result<Self> {
        let (g_inv, det) = inv3(g).ok_or(Error::SingularMetric(x))?;
        Ok(PointFrame {
            g: *g,
            g_inv,
            sqrt_det: math::sqrt(det),
            gamma: Christoffel([[[0.0; 3]; 3]; 3]),
            dg: [[[0.0; 3]; 3]; 3],
            d2g: [[[[0.0; 3]; 3]; 3]; 3],
        })
    }

    pub fn christoffel(&self) -> &Christoffel {
        &self.gamma
    }

    /// `R = g^{ij} R_ij` from analytic first and second partials.
    pub fn scalar_curvature(&self) -> f64 {
        let gi = &self.g_inv;
        let gam = &self.gamma.0;
        let first = first_kind(&self.dg);
        // dginv[m][k][l] = ∂_m g^{kl}
        let mut dginv = [[[0.0; 3]; 3]; 3];
        for m in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut acc = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            acc -= gi[k][a] * self.dg[m][a][b] * gi[b][l];
                        }
                    }
                    dginv[m][k][l] = acc;
                }
            }
        }
        // dgamma[m][k][i][j] = ∂_m Γ^k_ij
        let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
        for m in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        let mut acc = 0.0;
                        for l in 0..3 {
                            let dfirst = 0.5
                                * (self.d2g[m][i][j][l] + self.d2g[m][j][i][l]
                                    - self.d2g[m][l][i][j]);
                            acc += dginv[m][k][l] * first[l][i][j] + gi[k][l] * dfirst;
                        }
                        dgamma[m][k][i][j] = acc;
                    }
                }
            }
        }
        let mut r = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut ric = 0.0;
                for k in 0..3 {
                    ric += dgamma[k][k][i][j] - dgamma[j][k][i][k];
                    for l in 0..3 {
                        ric += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k];
                    }
                }
                r += gi[i][j] * ric;
            }
        }
        r
    }

    pub fn gradient(&self, u: &Jet) -> Gradient {
        let mut v = [0.0; 3];
        let mut n2 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v[i] += self.g_inv[i][j] * u.d[j];
            }
            n2 += v[i] * u.d[i];
        }
        Gradient {
            vector: v,
            norm: math::sqrt(n2.max(0.0)),
        }
    }

    pub fn hessian(&self, u: &Jet) -> Hessian {
        let gam = &self.gamma.0;
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let mut v = u.h[i][j];
                for k in 0..3 {
                    v -= gam[k][i][j] * u.d[k];
                }
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        // Raise both indices, then contract.
        let gi = &self.g_inv;
        let mut up = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        acc += gi[i][a] * gi[j][b] * h[a][b];
                    }
                }
                up[i][j] = acc;
            }
        }
        let mut n2 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                n2 += up[i][j] * h[i][j];
            }
        }
        Hessian {
            matrix: h,
            norm_sq: n2,
        }
    }

    /// `Δu = g^{ij} (∇²u)_ij`.
    pub fn laplacian(&self, u: &Jet) -> f64 {
        self.trace(&self.hessian(u).matrix)
    }

    /// `(1/√g) ∂_i(√g g^{ij} ∂_j u)` expanded with analytic metric partials.
    pub fn laplacian_divergence_form(&self, u: &Jet) -> f64 {
        let gi = &self.g_inv;
        let mut out = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                out += gi[i][j] * u.h[i][j];
            }
        }
        // (1/√g) ∂_i(√g g^{ij}) = ½ g^{ab} ∂_i g_ab g^{ij} - g^{ia} ∂_i g_ab g^{bj}
        for j in 0..3 {
            let mut c = 0.0;
            for i in 0..3 {
                let mut tr = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        tr += gi[a][b] * self.dg[i][a][b];
                        c -= gi[i][a] * self.dg[i][a][b] * gi[b][j];
                    }
                }
                c += 0.5 * tr * gi[i][j];
            }
            out += c * u.d[j];
        }
        out
    }

    pub fn trace(&self, m: &Mat3) -> f64 {
        let mut t = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                t += self.g_inv[i][j] * m[i][j];
            }
        }
        t
    }

    /// `div(-∇w/|∇w|)` at a regular point of `w`: the mean curvature of the
    /// level set of `w` through this point with respect to the normal pointing
    /// toward decreasing `w`.
    pub fn level_mean_curvature(&self, w: &Jet) -> f64 {
        let grad = self.gradient(w);
        let hess = self.hessian(w);
        let n = grad.norm;
        let lap = self.trace(&hess.matrix);
        let hvv = quad(&hess.matrix, &grad.vector);
        -lap / n + hvv / (n * n * n)
    }

    /// Area density of the coordinate surface spanned by axes `a`, `b`.
    pub fn area_density(&self, a: usize, b: usize) -> f64 {
        let d = self.g[a][a] * self.g[b][b] - self.g[a][b] * self.g[b][a];
        math::sqrt(d.max(0.0))
    }
}

/// `Γ_lij = ½(∂_i g_jl + ∂_j g_il - ∂_l g_ij)`, stored `[l][i][j]`.
fn first_kind(dg: &[Mat3; 3]) -> [[[f64; 3]; 3]; 3] {
    let mut out = [[[0.0; 3]; 3]; 3];
    for l in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let v = 0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                out[l][i][j] = v;
                out[l][j][i] = v;
            }
        }
    }
    out
}

pub(crate) fn quad(m: &Mat3, v: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += m[i][j] * v[i] * v[j];
        }
    }
    s
}

/// `m_ij a^i b^j`.
pub fn quad_pair(m: &Mat3, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += m[i][j] * a[i] * b[j];
        }
    }
    s
}

pub fn frame<M: MetricComponents + ?Sized>(metric: &M, x: [f64; 3]) -> Result<PointFrame> {
    metric.check_point(x)?;
    let s = MetricSample::from_components(&metric.components(&Jet::point(x)));
    PointFrame::from_sample(&s, x)
}

pub fn scalar_curvature<M: MetricComponents + ?Sized>(metric: &M, x: [f64; 3]) -> Result<f64> {
    Ok(frame(metric, x)?.scalar_curvature())
}

/// Mean curvature of the boundary plane at `x` (Cartesian coordinates,
/// `x3 = 0`), computed as `div(-∇x3/|∇x3|)`.
pub fn boundary_mean_curvature<M: MetricComponents + ?Sized>(
    metric: &M,
    x: [f64; 3],
) -> Result<f64> {
    if x[2] != 0.0 {
        return Err(Error::NotOnBoundary(x));
    }
    let f = frame(metric, x)?;
    Ok(f.level_mean_curvature(&Jet::variable(0.0, 2)))
}

pub fn gradient<M, F>(metric: &M, u: F, x: [f64; 3]) -> Result<Gradient>
where
    M: MetricComponents + ?Sized,
    F: Fn(&[Jet; 3]) -> Jet,
{
    Ok(frame(metric, x)?.gradient(&u(&Jet::point(x))))
}

pub fn hessian<M, F>(metric: &M, u: F, x: [f64; 3]) -> Result<Hessian>
where
    M: MetricComponents + ?Sized,
    F: Fn(&[Jet; 3]) -> Jet,
{
    Ok(frame(metric, x)?.hessian(&u(&Jet::point(x))))
}

pub fn laplacian<M, F>(metric: &M, u: F, x: [f64; 3]) -> Result<f64>
where
    M: MetricComponents + ?Sized,
    F: Fn(&[Jet; 3]) -> Jet,
{
    Ok(frame(metric, x)?.laplacian(&u(&Jet::point(x))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{make_flat, make_half_schwarzschild, make_perturbed_flat, MetricField};

    #[test]
    fn flat_frame_is_trivial() {
        let f = frame(&make_flat(), [1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.g_inv, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(f.gamma.0, [[[0.0; 3]; 3]; 3]);
        assert_eq!(f.scalar_curvature(), 0.0);
        assert_eq!(f.sqrt_det, 1.0);
    }

    #[test]
    fn conformal_christoffel_on_axis() {
        // Γ^1_11 = 2 φ^{-1} ∂_1 φ with φ = 1 + 1/(2r): at (2,0,0) φ = 5/4, ∂_1 φ = -1/8.
        let g = make_half_schwarzschild(1.0).unwrap();
        let f = frame(&g, [2.0, 0.0, 0.0]).unwrap();
        let expect = 2.0 / 1.25 * (-0.125);
        assert!((f.gamma.0[0][0][0] - expect).abs() < 1e-14);
        // Γ^2_21 = 2φ^{-1} ∂_1 φ, Γ^1_22 = -2φ^{-1} ∂_1 φ
        assert!((f.gamma.0[1][1][0] - expect).abs() < 1e-14);
        assert!((f.gamma.0[0][1][1] + expect).abs() < 1e-14);
    }

    #[test]
    fn boundary_mean_curvature_requires_boundary_point() {
        let g = make_flat();
        assert_eq!(
            boundary_mean_curvature(&g, [0.0, 0.0, 1.0]),
            Err(Error::NotOnBoundary([0.0, 0.0, 1.0]))
        );
        assert_eq!(boundary_mean_curvature(&g, [0.3, 2.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn gradient_of_height_in_conformal_metric() {
        let g = make_half_schwarzschild(1.0).unwrap();
        let x = [1.0, 2.0, 0.5];
        let phi = g.conformal_factor(&Jet::point(x)).unwrap().v;
        let gr = gradient(&g, |x| x[2], x).unwrap();
        assert!((gr.norm - phi.powi(-2)).abs() < 1e-14);
        let c = gradient(&g, |_| Jet::constant(3.0), x).unwrap();
        assert_eq!(c.norm, 0.0);
        assert_eq!(c.vector, [0.0; 3]);
        let flat = gradient(&make_flat(), |x| x[2], x).unwrap();
        assert_eq!(flat.vector, [0.0, 0.0, 1.0]);
        assert_eq!(flat.norm, 1.0);
    }

    #[test]
    fn flat_hessians() {
        let f = make_flat();
        let h = hessian(&f, |x| x[2], [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(h.matrix, [[0.0; 3]; 3]);
        let h = hessian(&f, |x| x[0] * x[0], [1.0, -2.0, 0.5]).unwrap();
        assert_eq!(h.matrix, [[2.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]);
        assert_eq!(h.norm_sq, 4.0);
        let l = laplacian(
            &f,
            |x| x[0] * x[0] + x[1] * x[1] - x[2] * x[2] * 2.0,
            [0.2, 0.3, 0.4],
        )
        .unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn conformal_laplacian_identity() {
        // Δ_g u = φ^{-4} Δ_δ u + 2 φ^{-5} δ(∇φ, ∇u)
        let g = make_half_schwarzschild(1.3).unwrap();
        let u = |x: &[Jet; 3]| (x[0] * x[1]).sin() + x[2] * x[2] * x[0] + x[1].exp();
        for x in [[1.0, 0.4, 0.9], [-2.0, 1.5, 0.1], [0.3, 0.3, 3.0]] {
            let j = u(&Jet::point(x));
            let phi = g.conformal_factor(&Jet::point(x)).unwrap();
            let lap_flat = j.h[0][0] + j.h[1][1] + j.h[2][2];
            let dot: f64 = (0..3).map(|i| phi.d[i] * j.d[i]).sum();
            let expect = phi.v.powi(-4) * lap_flat + 2.0 * phi.v.powi(-5) * dot;
            let got = laplacian(&g, u, x).unwrap();
            assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
        }
    }

    #[test]
    fn divergence_and_trace_forms_agree() {
        let g = make_perturbed_flat(0.2, 0.8, 11).unwrap();
        let u = |x: &[Jet; 3]| x[0] * x[2] + (x[1] * 0.3).cos() * x[2];
        for x in [[1.0, 0.4, 0.9], [-2.0, 1.5, 0.1]] {
            let f = frame(&g, x).unwrap();
            let j = u(&Jet::point(x));
            let a = f.laplacian(&j);
            let b = f.laplacian_divergence_form(&j);
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}
