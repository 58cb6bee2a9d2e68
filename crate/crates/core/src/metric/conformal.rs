use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{diagonal, dist, Excision, MetricComponents, MetricField, Sym3};
use crate::error::{Error, Result};
use crate::jet::{self, Jet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bubble {
    pub mass: f64,
    pub center: [f64; 3],
    /// Smoothing length `s`: the source term becomes `m / (2√(|x - p|² + s²))`,
    /// a regular lump with `R_g > 0` and no horizon. Zero for a point source.
    pub core: f64,
}

impl Bubble {
    pub fn point(mass: f64, center: [f64; 3]) -> Self {
        Bubble {
            mass,
            center,
            core: 0.0,
        }
    }

    pub fn smoothed(mass: f64, center: [f64; 3], core: f64) -> Self {
        Bubble { mass, center, core }
    }
}

/// Sources of a conformal factor `φ = 1 + Σ m_i / (2|x - p_i|)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConformalBubbleSpec {
    pub bubbles: Vec<Bubble>,
    /// Adds the reflection of every center with `p3 > 0`, which forces
    /// `∂3 φ = 0` on the boundary plane.
    pub mirror: bool,
}

/// Conformally flat data `g = φ^4 δ` with a Euclidean-harmonic `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalMetric {
    spec: ConformalBubbleSpec,
    sources: Vec<Bubble>,
    excisions: Vec<Excision>,
}

/// Half of the Schwarzschild slice in isotropic coordinates, centered at the
/// origin; the horizon is the coordinate hemisphere `r = m/2`.
pub fn make_half_schwarzschild(m: f64) -> Result<ConformalMetric> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "half-Schwarzschild mass must be positive, got {m}"
        )));
    }
    make_conformal_superposition(ConformalBubbleSpec {
        bubbles: alloc::vec![Bubble::point(m, [0.0; 3])],
        mirror: true,
    })
}

pub fn make_conformal_superposition(spec: ConformalBubbleSpec) -> Result<ConformalMetric> {
    for (i, b) in spec.bubbles.iter().enumerate() {
        if !(b.mass > 0.0 && b.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bubble {i} has non-positive mass {}",
                b.mass
            )));
        }
        if !(b.center[2] >= 0.0) || b.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bubble {i} center {:?} is outside the half-space",
                b.center
            )));
        }
        if !(b.core >= 0.0 && b.core.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bubble {i} has invalid core length {}",
                b.core
            )));
        }
        for (j, other) in spec.bubbles.iter().enumerate().take(i) {
            if dist(b.center, other.center) == 0.0 {
                return Err(Error::CoincidentCenters(j, i));
            }
        }
    }
    let mut sources = spec.bubbles.clone();
    if spec.mirror {
        for b in &spec.bubbles {
            if b.center[2] > 0.0 {
                sources.push(Bubble {
                    center: [b.center[0], b.center[1], -b.center[2]],
                    ..*b
                });
            }
        }
    }
    let points = || spec.bubbles.iter().filter(|b| b.core == 0.0);
    let approximate = points().count() > 1;
    let excisions = points()
        .map(|b| Excision {
            center: b.center,
            radius: 0.5 * b.mass,
            approximate,
        })
        .collect();
    Ok(ConformalMetric {
        spec,
        sources,
        excisions,
    })
}

impl ConformalMetric {
    pub fn spec(&self) -> &ConformalBubbleSpec {
        &self.spec
    }

    pub fn phi(&self, x: &[Jet; 3]) -> Jet {
        let mut phi = Jet::ONE;
        for s in &self.sources {
            let y = [x[0] - s.center[0], x[1] - s.center[1], x[2] - s.center[2]];
            let d = if s.core == 0.0 {
                jet::norm(&y)
            } else {
                (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + s.core * s.core).sqrt()
            };
            phi += d.recip().scale(0.5 * s.mass);
        }
        phi
    }

    /// Total of the bubble masses.
    pub fn total_mass_parameter(&self) -> f64 {
        self.spec.bubbles.iter().map(|b| b.mass).sum()
    }
}

impl MetricComponents for ConformalMetric {
    fn components(&self, x: &[Jet; 3]) -> Sym3 {
        diagonal(self.phi(x).powi(4))
    }

    fn check_point(&self, x: [f64; 3]) -> Result<()> {
        if self.sources.iter().any(|s| s.core == 0.0 && dist(x, s.center) == 0.0) {
            return Err(Error::SingularMetric(x));
        }
        Ok(())
    }
}

impl MetricField for ConformalMetric {
    fn name(&self) -> String {
        match self.spec.bubbles.as_slice() {
            [] => String::from("flat"),
            [b] if b.center == [0.0; 3] && b.core == 0.0 => {
                format!("half-schwarzschild(m={})", b.mass)
            }
            bs if bs.iter().any(|b| b.core > 0.0) => {
                format!("conformal-superposition({} smoothed bubbles)", bs.len())
            }
            bs => format!("conformal-superposition({} bubbles)", bs.len()),
        }
    }

    fn decay_rate(&self) -> f64 {
        if self.sources.is_empty() {
            f64::INFINITY
        } else {
            1.0
        }
    }

    fn mirror_symmetric(&self) -> bool {
        self.spec.mirror || self.spec.bubbles.iter().all(|b| b.center[2] == 0.0)
    }

    fn excisions(&self) -> &[Excision] {
        &self.excisions
    }

    fn conformal_factor(&self, x: &[Jet; 3]) -> Option<Jet> {
        Some(self.phi(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::make_flat;

    #[test]
    fn half_schwarzschild_value_on_axis() {
        let g = make_half_schwarzschild(1.0).unwrap();
        let v = g.eval([2.0, 0.0, 0.0]).unwrap();
        // (1 + 1/4)^4
        assert!((v[0][0] - 2.44140625).abs() < 1e-15);
        assert_eq!(v[0][1], 0.0);
        assert!((v[2][2] - 2.44140625).abs() < 1e-15);
        assert_eq!(g.excisions()[0].radius, 0.5);
        assert!(!g.excisions()[0].approximate);
        assert_eq!(g.decay_rate(), 1.0);
        assert!(g.mirror_symmetric());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_half_schwarzschild(0.0).is_err());
        assert!(make_half_schwarzschild(-1.0).is_err());
        assert!(matches!(
            make_half_schwarzschild(1.0).unwrap().eval([0.0; 3]),
            Err(Error::SingularMetric(_))
        ));
        let spec = ConformalBubbleSpec {
            bubbles: alloc::vec![
                Bubble::point(1.0, [1.0, 0.0, 0.0]),
                Bubble::point(2.0, [1.0, 0.0, 0.0]),
            ],
            mirror: true,
        };
        assert_eq!(
            make_conformal_superposition(spec),
            Err(Error::CoincidentCenters(0, 1))
        );
    }

    #[test]
    fn empty_superposition_is_flat() {
        let g = make_conformal_superposition(ConformalBubbleSpec::default()).unwrap();
        let f = make_flat();
        for x in [[1.0, 2.0, 3.0], [0.1, -4.0, 0.0]] {
            assert_eq!(g.sample(x).unwrap(), f.sample(x).unwrap());
        }
    }

    #[test]
    fn single_boundary_bubble_matches_half_schwarzschild() {
        let a = make_half_schwarzschild(0.7).unwrap();
        let b = make_conformal_superposition(ConformalBubbleSpec {
            bubbles: alloc::vec![Bubble::point(0.7, [0.0; 3])],
            mirror: false,
        })
        .unwrap();
        for x in [[1.0, 2.0, 3.0], [0.4, -0.1, 0.0], [5.0, 5.0, 5.0]] {
            assert_eq!(a.sample(x).unwrap(), b.sample(x).unwrap());
        }
    }

    #[test]
    fn mirrored_interior_bubble_has_flat_normal_derivative() {
        let g = make_conformal_superposition(ConformalBubbleSpec {
            bubbles: alloc::vec![Bubble::point(0.5, [0.5, 0.0, 1.5])],
            mirror: true,
        })
        .unwrap();
        assert!(g.mirror_symmetric());
        let phi = g.phi(&Jet::point([1.0, 2.0, 0.0]));
        assert!(phi.d[2].abs() < 1e-15);
        assert!(phi.v > 1.0);
    }
}
