use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_positive, diagonal, Excision, MetricComponents, MetricField, Sym3};
use crate::error::{Error, Result};
use crate::jet::Jet;

const GAUGE_TERMS: usize = 2;
const BUMP_TERMS: usize = 2;

/// Linearized boundary-preserving diffeomorphism `h = ∂ξ + (∂ξ)ᵀ` with
/// `ξ_α = c_α ρ^{1-τ}` and `ξ_3 = c_3 x_3 ρ^{-τ}`, `ρ = (s² + |x-p|²)^{1/2}`.
#[derive(Clone, Debug, PartialEq)]
struct GaugeTerm {
    center: [f64; 3],
    scale: f64,
    coeff: [f64; 3],
}

/// `S_ij exp(-|x-p|²/w²)` with a symmetric constant tensor `S`.
#[derive(Clone, Debug, PartialEq)]
struct BumpTerm {
    center: [f64; 3],
    width: f64,
    tensor: [[f64; 3]; 3],
}

/// `ψ δ_ij` with `ψ = 2μ ρ^{-q}`, `q = max(τ, 1)`. Carries mass `μ/2` when
/// `τ <= 1` and none otherwise.
#[derive(Clone, Debug, PartialEq)]
struct MassTerm {
    center: [f64; 3],
    scale: f64,
    strength: f64,
}

/// `g = δ + a·h` with `h` a seeded sum of decaying gauge profiles (which fall
/// off like `r^{-τ}`), an isotropic mass profile and Gaussian bumps. Not mirror symmetric in general,
/// and the energy conditions are not guaranteed.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedFlat {
    amplitude: f64,
    tau: f64,
    seed: u64,
    gauge: Vec<GaugeTerm>,
    mass: MassTerm,
    bumps: Vec<BumpTerm>,
}

pub fn make_perturbed_flat(amplitude: f64, tau: f64, seed: u64) -> Result<PerturbedFlat> {
    if !(tau > 0.5 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "decay rate must exceed 1/2, got {tau}"
        )));
    }
    if !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "amplitude must be finite, got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauge = (0..GAUGE_TERMS)
        .map(|_| GaugeTerm {
            center: [
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.0..2.0),
            ],
            scale: rng.random_range(1.0..2.0),
            coeff: [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ],
        })
        .collect();
    let mass = MassTerm {
        center: [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..1.0),
        ],
        scale: rng.random_range(1.0..2.0),
        strength: rng.random_range(0.5..1.5),
    };
    let bumps = (0..BUMP_TERMS)
        .map(|_| {
            let center = [
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.0..2.0),
            ];
            let width = rng.random_range(1.0..2.0);
            let mut tensor = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in i..3 {
                    let v = rng.random_range(-1.0..1.0);
                    tensor[i][j] = v;
                    tensor[j][i] = v;
                }
            }
            BumpTerm {
                center,
                width,
                tensor,
            }
        })
        .collect();
    let metric = PerturbedFlat {
        amplitude,
        tau,
        seed,
        gauge,
        mass,
        bumps,
    };
    metric.check_lattice()?;
    Ok(metric)
}

impl PerturbedFlat {
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Mass of the isotropic profile, `a·μ/2` for `τ <= 1`; the gauge and
    /// bump profiles carry none.
    pub fn expected_mass(&self) -> f64 {
        if self.tau <= 1.0 {
            0.5 * self.amplitude * self.mass.strength
        } else {
            0.0
        }
    }

    fn check_lattice(&self) -> Result<()> {
        let mut pts = Vec::new();
        for i in -8..=8 {
            for j in -8..=8 {
                for k in 0..=8 {
                    pts.push([i as f64, j as f64, k as f64]);
                }
            }
        }
        for i in -4..=4 {
            for j in -4..=4 {
                for k in 0..=4 {
                    pts.push([8.0 * i as f64, 8.0 * j as f64, 8.0 * k as f64]);
                }
            }
        }
        for x in pts {
            check_positive(&self.components(&Jet::constant_point(x)), x)?;
        }
        Ok(())
    }

    /// Perturbation `h_ij` (without the amplitude).
    fn perturbation(&self, x: &[Jet; 3]) -> Sym3 {
        let mut h = diagonal(Jet::ZERO);
        let tau = self.tau;
        for t in &self.gauge {
            let y = [x[0] - t.center[0], x[1] - t.center[1], x[2] - t.center[2]];
            let rho2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + t.scale * t.scale;
            let rho_mtau = rho2.powf(-0.5 * tau);
            let rho_mtau_m1 = rho2.powf(-0.5 * (tau + 1.0));
            let rho_mtau_m2 = rho2.powf(-0.5 * (tau + 2.0));
            // grad[i][j] = ∂_i ξ_j
            let mut grad = diagonal(Jet::ZERO);
            for i in 0..3 {
                for a in 0..2 {
                    grad[i][a] = (y[i] * rho_mtau_m1).scale(t.coeff[a] * (1.0 - tau));
                }
                let mut d3 = (x[2] * y[i] * rho_mtau_m2).scale(-tau);
                if i == 2 {
                    d3 += rho_mtau;
                }
                grad[i][2] = d3.scale(t.coeff[2]);
            }
            for i in 0..3 {
                for j in 0..3 {
                    h[i][j] += grad[i][j] + grad[j][i];
                }
            }
        }
        {
            let t = &self.mass;
            let y = [x[0] - t.center[0], x[1] - t.center[1], x[2] - t.center[2]];
            let rho2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + t.scale * t.scale;
            let psi = rho2.powf(-0.5 * self.tau.max(1.0)).scale(2.0 * t.strength);
            for i in 0..3 {
                h[i][i] += psi;
            }
        }
        for b in &self.bumps {
            let y = [x[0] - b.center[0], x[1] - b.center[1], x[2] - b.center[2]];
            let q = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).scale(-1.0 / (b.width * b.width));
            let e = q.exp();
            for i in 0..3 {
                for j in 0..3 {
                    h[i][j] += e.scale(b.tensor[i][j]);
                }
            }
        }
        h
    }
}

impl MetricComponents for PerturbedFlat {
    fn components(&self, x: &[Jet; 3]) -> Sym3 {
        let mut g = self.perturbation(x);
        for (i, row) in g.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = c.scale(self.amplitude);
                if i == j {
                    *c = *c + 1.0;
                }
            }
        }
        g
    }
}

impl MetricField for PerturbedFlat {
    fn name(&self) -> String {
        format!(
            "perturbed-flat(a={}, tau={}, seed={})",
            self.amplitude, self.tau, self.seed
        )
    }

    fn decay_rate(&self) -> f64 {
        self.tau
    }

    fn mirror_symmetric(&self) -> bool {
        self.amplitude == 0.0
    }

    fn excisions(&self) -> &[Excision] {
        &[]
    }

    fn energy_conditions_verified(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{decay_profile, make_flat};

    #[test]
    fn zero_amplitude_is_flat() {
        let p = make_perturbed_flat(0.0, 0.8, 7).unwrap();
        for x in [[1.0, 2.0, 3.0], [-3.0, 0.5, 0.0]] {
            assert_eq!(p.sample(x).unwrap(), make_flat().sample(x).unwrap());
        }
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let a = make_perturbed_flat(0.1, 0.8, 42).unwrap();
        let b = make_perturbed_flat(0.1, 0.8, 42).unwrap();
        let c = make_perturbed_flat(0.1, 0.8, 43).unwrap();
        let x = [0.3, -1.7, 2.2];
        assert_eq!(a.sample(x).unwrap(), b.sample(x).unwrap());
        assert_ne!(a.sample(x).unwrap(), c.sample(x).unwrap());
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(make_perturbed_flat(0.1, 0.5, 1).is_err());
        assert!(make_perturbed_flat(f64::NAN, 0.8, 1).is_err());
        assert!(matches!(
            make_perturbed_flat(50.0, 0.8, 1),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn decay_bound_scales_with_amplitude() {
        let dirs = [[1.0, 0.0, 0.2], [-0.3, 1.0, 1.0], [0.0, 0.0, 1.0]];
        let radii = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0];
        let bound = |a: f64| {
            let p = make_perturbed_flat(a, 0.8, 3).unwrap();
            let mut m: f64 = 0.0;
            for d in dirs {
                for v in decay_profile(&p, d, &radii).unwrap() {
                    m = m.max(v[0]).max(v[1]).max(v[2]);
                }
            }
            m
        };
        let b1 = bound(0.05);
        let b2 = bound(0.1);
        assert!(b1 > 0.0 && b1 < 10.0);
        assert!((b2 / b1 - 2.0).abs() < 1e-9);
    }
}
