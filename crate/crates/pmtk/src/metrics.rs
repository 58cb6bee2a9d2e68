//! Registry of metric families that configuration files can name.

use pmtk_core::metric::{
    make_conformal_superposition, make_flat, make_half_schwarzschild, make_perturbed_flat, Bubble,
    ConformalBubbleSpec, MetricField, Scaled,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Flat,
    HalfSchwarzschild,
    ConformalSuperposition,
    PerturbedFlat,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleEntry {
    pub mass: f64,
    pub center: [f64; 3],
    /// Smoothing length; 0 for a point source with its horizon excised.
    #[serde(default)]
    pub core: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bubbles: Vec<BubbleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Pull back by `x ↦ x/λ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl MetricSpec {
    pub fn new(family: Family) -> Self {
        MetricSpec {
            family,
            m: None,
            bubbles: Vec::new(),
            mirror: None,
            amplitude: None,
            tau: None,
            seed: None,
            scale: None,
        }
    }
}

pub struct FamilyInfo {
    pub name: &'static str,
    pub parameters: &'static str,
    pub summary: &'static str,
}

pub const FAMILIES: [FamilyInfo; 4] = [
    FamilyInfo {
        name: "flat",
        parameters: "",
        summary: "Euclidean half-space",
    },
    FamilyInfo {
        name: "half-schwarzschild",
        parameters: "m > 0",
        summary: "(1 + m/2r)^4 δ with the horizon hemisphere r = m/2 excised",
    },
    FamilyInfo {
        name: "conformal-superposition",
        parameters: "bubbles = [{ mass, center, core }], mirror",
        summary: "φ^4 δ with φ = 1 + Σ m/(2 sqrt(|x - p|² + core²))",
    },
    FamilyInfo {
        name: "perturbed-flat",
        parameters: "amplitude, tau > 1/2, seed",
        summary: "δ + a·h with seeded decaying perturbations; energy conditions not guaranteed",
    },
];

fn require<T: Copy>(v: Option<T>, field: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(field, format!("required for family {family}")))
}

fn reject(present: bool, field: &str, family: &str) -> Result<()> {
    if present {
        Err(Error::config(field, format!("not a parameter of family {family}")))
    } else {
        Ok(())
    }
}

pub fn build_metric(spec: &MetricSpec) -> Result<Box<dyn MetricField>> {
    let base: Box<dyn MetricField> = match spec.family {
        Family::Flat => {
            let f = "flat";
            reject(spec.m.is_some(), "m", f)?;
            reject(!spec.bubbles.is_empty(), "bubbles", f)?;
            reject(spec.mirror.is_some(), "mirror", f)?;
            reject(spec.amplitude.is_some() || spec.tau.is_some() || spec.seed.is_some(), "amplitude", f)?;
            Box::new(make_flat())
        }
        Family::HalfSchwarzschild => {
            let f = "half-schwarzschild";
            reject(!spec.bubbles.is_empty(), "bubbles", f)?;
            reject(spec.mirror.is_some(), "mirror", f)?;
            reject(spec.amplitude.is_some() || spec.tau.is_some() || spec.seed.is_some(), "amplitude", f)?;
            let m = require(spec.m, "m", f)?;
            Box::new(make_half_schwarzschild(m).map_err(|e| Error::config("m", e.to_string()))?)
        }
        Family::ConformalSuperposition => {
            let f = "conformal-superposition";
            reject(spec.m.is_some(), "m", f)?;
            reject(spec.amplitude.is_some() || spec.tau.is_some() || spec.seed.is_some(), "amplitude", f)?;
            let bubbles = spec
                .bubbles
                .iter()
                .map(|b| Bubble {
                    mass: b.mass,
                    center: b.center,
                    core: b.core,
                })
                .collect();
            let s = ConformalBubbleSpec {
                bubbles,
                mirror: spec.mirror.unwrap_or(true),
            };
            Box::new(make_conformal_superposition(s).map_err(|e| Error::config("bubbles", e.to_string()))?)
        }
        Family::PerturbedFlat => {
            let f = "perturbed-flat";
            reject(spec.m.is_some(), "m", f)?;
            reject(!spec.bubbles.is_empty(), "bubbles", f)?;
            reject(spec.mirror.is_some(), "mirror", f)?;
            let a = require(spec.amplitude, "amplitude", f)?;
            let tau = require(spec.tau, "tau", f)?;
            let seed = require(spec.seed, "seed", f)?;
            Box::new(make_perturbed_flat(a, tau, seed).map_err(|e| Error::config("amplitude", e.to_string()))?)
        }
    };
    match spec.scale {
        None => Ok(base),
        Some(l) if l > 0.0 && l.is_finite() => Ok(Box::new(Scaled::new(base, l))),
        Some(_) => Err(Error::config("scale", "must be positive and finite")),
    }
}

/// Closed-form mass where one is known.
pub fn exact_mass(spec: &MetricSpec) -> Option<f64> {
    let base = match spec.family {
        Family::Flat => 0.0,
        Family::HalfSchwarzschild => 0.5 * spec.m?,
        Family::ConformalSuperposition => {
            // Every source (mirror images included) adds m/2 to the mass of
            // the doubled manifold's half.
            let mirror = spec.mirror.unwrap_or(true);
            spec.bubbles
                .iter()
                .map(|b| {
                    let images = if mirror && b.center[2] > 0.0 { 2.0 } else { 1.0 };
                    0.5 * images * b.mass
                })
                .sum()
        }
        Family::PerturbedFlat => {
            make_perturbed_flat(spec.amplitude?, spec.tau?, spec.seed?)
                .ok()?
                .expected_mass()
        }
    };
    Some(base * spec.scale.unwrap_or(1.0))
}

/// `m (1 + m/2r)^3 / 2`: flux through the hemisphere of radius `r` for the
/// half-Schwarzschild family, scale included.
pub fn hemisphere_closed_form(spec: &MetricSpec, r: f64) -> Option<f64> {
    if spec.family != Family::HalfSchwarzschild {
        return None;
    }
    let m = spec.m? * spec.scale.unwrap_or(1.0);
    Some(0.5 * m * (1.0 + m / (2.0 * r)).powi(3))
}
