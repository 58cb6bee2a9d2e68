use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Excision, MetricComponents, MetricField, Sym3};
use crate::error::Result;
use crate::jet::Jet;

/// The homothety `g_λ(x) = g(x / λ)`, isometric to `λ² g`; lengths, and so
/// the mass, scale by `λ`.
pub struct Scaled<M> {
    inner: M,
    lambda: f64,
    excisions: Vec<Excision>,
}

impl<M: MetricField> Scaled<M> {
    pub fn new(inner: M, lambda: f64) -> Self {
        let excisions = inner
            .excisions()
            .iter()
            .map(|e| Excision {
                center: [
                    e.center[0] * lambda,
                    e.center[1] * lambda,
                    e.center[2] * lambda,
                ],
                radius: e.radius * lambda,
                approximate: e.approximate,
            })
            .collect();
        Scaled {
            inner,
            lambda,
            excisions,
        }
    }

    fn pull(&self, x: &[Jet; 3]) -> [Jet; 3] {
        let s = 1.0 / self.lambda;
        [x[0].scale(s), x[1].scale(s), x[2].scale(s)]
    }
}

impl<M: MetricField> MetricComponents for Scaled<M> {
    fn components(&self, x: &[Jet; 3]) -> Sym3 {
        self.inner.components(&self.pull(x))
    }

    fn check_point(&self, x: [f64; 3]) -> Result<()> {
        let s = 1.0 / self.lambda;
        self.inner.check_point([x[0] * s, x[1] * s, x[2] * s])
    }
}

impl<M: MetricField> MetricField for Scaled<M> {
    fn name(&self) -> String {
        format!("scaled({}, lambda={})", self.inner.name(), self.lambda)
    }

    fn decay_rate(&self) -> f64 {
        self.inner.decay_rate()
    }

    fn mirror_symmetric(&self) -> bool {
        self.inner.mirror_symmetric()
    }

    fn excisions(&self) -> &[Excision] {
        &self.excisions
    }

    fn conformal_factor(&self, x: &[Jet; 3]) -> Option<Jet> {
        self.inner.conformal_factor(&self.pull(x))
    }

    fn energy_conditions_verified(&self) -> bool {
        self.inner.energy_conditions_verified()
    }
}

/// Extension of a half-space metric to all of ℝ³ by reflection across
/// `x3 = 0`: `g(x) = R g(Rx) R` for `x3 < 0`, `R = diag(1, 1, -1)`.
pub struct Doubled<'a>(pub &'a dyn MetricField);

impl MetricComponents for Doubled<'_> {
    fn components(&self, x: &[Jet; 3]) -> Sym3 {
        if x[2].v >= 0.0 {
            return self.0.components(x);
        }
        let mut g = self.0.components(&[x[0], x[1], -x[2]]);
        for a in 0..2 {
            g[a][2] = -g[a][2];
            g[2][a] = -g[2][a];
        }
        g
    }

    fn check_point(&self, x: [f64; 3]) -> Result<()> {
        self.0.check_point([x[0], x[1], x[2].abs()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{make_half_schwarzschild, make_perturbed_flat};

    #[test]
    fn scaling_schwarzschild_doubles_mass_parameter() {
        let s = Scaled::new(make_half_schwarzschild(1.0).unwrap(), 2.0);
        let m2 = make_half_schwarzschild(2.0).unwrap();
        for x in [[1.5, 0.2, 0.3], [3.0, -4.0, 1.0]] {
            let a = s.sample(x).unwrap();
            let b = m2.sample(x).unwrap();
            for k in 0..3 {
                for i in 0..3 {
                    assert!((a.dg[k][i][i] - b.dg[k][i][i]).abs() < 1e-14);
                }
            }
            assert!((a.g[0][0] - b.g[0][0]).abs() < 1e-14);
        }
        assert_eq!(s.excisions()[0].radius, 1.0);
    }

    #[test]
    fn doubling_reflects_mixed_components() {
        let p = make_perturbed_flat(0.1, 0.8, 5).unwrap();
        let d = Doubled(&p);
        let up = d.components(&Jet::constant_point([0.5, 0.2, 1.3]));
        let down = d.components(&Jet::constant_point([0.5, 0.2, -1.3]));
        assert_eq!(up[0][2].v, -down[0][2].v);
        assert_eq!(up[1][1].v, down[1][1].v);
    }
}
