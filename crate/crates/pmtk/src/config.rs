//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use pmtk_core::mass::{default_radii, Exhaustion, MassQuadrature};
use pmtk_core::solver::Truncation;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{build_metric, MetricSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MassStudy,
    SolverConvergence,
    Inequality,
    /// Every section present in the file.
    FullSuite,
    DerivativeCheck,
    ScaleCovariance,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::MassStudy => "mass-study",
            ExperimentKind::SolverConvergence => "solver-convergence",
            ExperimentKind::Inequality => "inequality",
            ExperimentKind::FullSuite => "full-suite",
            ExperimentKind::DerivativeCheck => "derivative-check",
            ExperimentKind::ScaleCovariance => "scale-covariance",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Hemisphere,
    Sphere,
    HalfCylinder,
}

impl Shape {
    pub fn exhaustion(self) -> Exhaustion {
        match self {
            Shape::Hemisphere => Exhaustion::Hemisphere,
            Shape::Sphere => Exhaustion::Sphere,
            Shape::HalfCylinder => Exhaustion::HalfCylinder,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TruncationSpec {
    Shell {
        r_out: f64,
    },
    Box {
        half_width: f64,
        height: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stretch: Option<f64>,
    },
}

impl TruncationSpec {
    pub fn truncation(self) -> Truncation {
        match self {
            TruncationSpec::Shell { r_out } => Truncation::Shell { r_out },
            TruncationSpec::Box {
                half_width,
                height,
                stretch,
            } => Truncation::Box {
                half_width,
                height,
                stretch,
            },
        }
    }

    /// The same region after `x ↦ λx`.
    pub fn scaled(self, lambda: f64) -> Self {
        match self {
            TruncationSpec::Shell { r_out } => TruncationSpec::Shell { r_out: lambda * r_out },
            TruncationSpec::Box {
                half_width,
                height,
                stretch,
            } => TruncationSpec::Box {
                half_width: lambda * half_width,
                height: lambda * height,
                stretch: stretch.map(|l| lambda * l),
            },
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        let ok = match *self {
            TruncationSpec::Shell { r_out } => r_out > 0.0 && r_out.is_finite(),
            TruncationSpec::Box {
                half_width,
                height,
                stretch,
            } => {
                half_width > 0.0
                    && height > 0.0
                    && half_width.is_finite()
                    && height.is_finite()
                    && stretch.is_none_or(|l| l > 0.0 && l.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(field, "extents must be positive and finite"))
        }
    }
}

fn default_quadrature() -> usize {
    1024
}

fn default_solver_tol() -> f64 {
    1e-10
}

fn default_shapes() -> Vec<Shape> {
    vec![Shape::Hemisphere]
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MassSection {
    #[serde(default = "default_shapes")]
    pub shapes: Vec<Shape>,
    /// Radii (or half-cylinder sizes); defaults to `max(20, 4·reach)·2^k`, `k < 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverCheck {
    ResidualOrder,
    MinGradient,
    IdentityOrder,
    Coarea,
    Levels,
    NegativeControl,
    BulkStability,
}

impl SolverCheck {
    pub const ALL: [SolverCheck; 7] = [
        SolverCheck::ResidualOrder,
        SolverCheck::MinGradient,
        SolverCheck::IdentityOrder,
        SolverCheck::Coarea,
        SolverCheck::Levels,
        SolverCheck::NegativeControl,
        SolverCheck::BulkStability,
    ];
}

fn default_checks() -> Vec<SolverCheck> {
    SolverCheck::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub truncation: TruncationSpec,
    /// Per-axis node counts, coarse to fine.
    pub resolutions: Vec<[usize; 3]>,
    #[serde(default = "default_solver_tol")]
    pub tolerance: f64,
    /// Levels for the connectedness check; five evenly spaced interior
    /// levels when empty.
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default = "default_checks")]
    pub checks: Vec<SolverCheck>,
    /// Write the finest solution as a binary dump.
    #[serde(default)]
    pub dump: bool,
}

fn default_energy_samples() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySection {
    pub truncation: TruncationSpec,
    pub nodes: [usize; 3],
    #[serde(default = "default_solver_tol")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
    #[serde(default = "default_energy_samples")]
    pub energy_samples: usize,
}

fn default_points() -> usize {
    1000
}
fn default_extent() -> f64 {
    8.0
}
fn default_step() -> f64 {
    1e-2
}
fn default_margin() -> f64 {
    1.5
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeSection {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Further metrics checked alongside the main one.
    #[serde(default)]
    pub also: Vec<MetricSpec>,
}

fn default_factor() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSection {
    #[serde(default = "default_factor")]
    pub factor: f64,
    /// Truncation for the unscaled metric; the scaled run uses its image.
    pub truncation: TruncationSpec,
    pub nodes: [usize; 3],
    #[serde(default = "default_solver_tol")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
}

/// Thresholds of the verdict rules. Every field has a default.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerdictTolerances {
    /// `|m̂ - m_exact|` for metrics with a known mass.
    pub mass: f64,
    /// Finite-radius hemisphere values against the closed form.
    pub finite_radius: f64,
    /// Agreement of the extrapolations over different exhaustions.
    pub exhaustion: f64,
    /// Use the sum of the fit residuals instead of `exhaustion`.
    pub exhaustion_within_fit: bool,
    pub residual_order: f64,
    /// Relative change of `min |∇u|` over Σ between the two finest rungs.
    pub gradient_stability: f64,
    pub identity_order: f64,
    /// Isosurface against cell-sum mismatch at the finest rung.
    pub coarea: f64,
    /// Relative change of the bulk integral between the two finest rungs.
    pub bulk_stability: f64,
    /// Largest admissible `tol_total / m̂`.
    pub tolerance_fraction: f64,
    /// Flat metric: `|m̂|`.
    pub flat_mass: f64,
    /// Flat metric: `B` and `|S|`.
    pub flat_integral: f64,
    /// Flat metric: `max |u - x3|`.
    pub flat_field: f64,
    pub derivative_order: f64,
    pub derivative_defect: f64,
    /// `|m̂(λ) - λ m̂|`.
    pub scale_mass: f64,
    /// Relative deviation of `(B + S)(λ)` from `λ (B + S)`.
    pub scale_rhs: f64,
    /// Wall-clock budget for the whole run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
}

impl Default for VerdictTolerances {
    fn default() -> Self {
        VerdictTolerances {
            mass: 5e-4,
            finite_radius: 1e-6,
            exhaustion: 1e-3,
            exhaustion_within_fit: false,
            residual_order: 1.8,
            gradient_stability: 0.02,
            identity_order: 1.0,
            coarea: 0.02,
            bulk_stability: 0.02,
            tolerance_fraction: 0.05,
            flat_mass: 1e-8,
            flat_integral: 1e-10,
            flat_field: 1e-8,
            derivative_order: 1.9,
            derivative_defect: 1e-10,
            scale_mass: 1e-3,
            scale_rhs: 0.05,
            max_seconds: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub metric: MetricSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequality: Option<InequalitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivatives: Option<DerivativeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleSection>,
    #[serde(default)]
    pub verdicts: VerdictTolerances,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| e.in_file(path))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration is serializable")
    }

    /// Replaces every grid size with `nodes` (solver ladders become the two
    /// successive coarsenings of `nodes` followed by `nodes`).
    pub fn override_resolution(&mut self, nodes: [usize; 3]) {
        if let Some(s) = &mut self.solver {
            let n = s.resolutions.len().max(1);
            let mut ladder = vec![nodes];
            while ladder.len() < n {
                let c = pmtk_core::inequality::coarsen(ladder[0]);
                ladder.insert(0, c);
            }
            s.resolutions = ladder;
        }
        if let Some(s) = &mut self.inequality {
            s.nodes = nodes;
        }
        if let Some(s) = &mut self.scale {
            s.nodes = nodes;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config("name", "must be a nonempty file-name-safe string"));
        }
        build_metric(&self.metric).map_err(|e| e.at("metric"))?;
        let need = |present: bool, section: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::config(
                    section,
                    format!("section is required for kind {}", self.kind.as_str()),
                ))
            }
        };
        match self.kind {
            ExperimentKind::MassStudy => need(self.mass.is_some(), "mass")?,
            ExperimentKind::SolverConvergence => need(self.solver.is_some(), "solver")?,
            ExperimentKind::Inequality => need(self.inequality.is_some(), "inequality")?,
            ExperimentKind::DerivativeCheck => need(self.derivatives.is_some(), "derivatives")?,
            ExperimentKind::ScaleCovariance => need(self.scale.is_some(), "scale")?,
            ExperimentKind::FullSuite => {
                let any = self.mass.is_some()
                    || self.solver.is_some()
                    || self.inequality.is_some()
                    || self.derivatives.is_some()
                    || self.scale.is_some();
                need(any, "mass")?;
            }
        }
        if let Some(m) = &self.mass {
            if m.shapes.is_empty() {
                return Err(Error::config("mass.shapes", "must not be empty"));
            }
            if let Some(r) = &m.radii {
                check_ladder(r, "mass.radii")?;
            }
            check_quadrature(m.quadrature, "mass.quadrature")?;
        }
        if let Some(s) = &self.solver {
            s.truncation.validate("solver.truncation")?;
            if s.resolutions.is_empty() {
                return Err(Error::config("solver.resolutions", "must not be empty"));
            }
            for n in &s.resolutions {
                check_nodes(n, "solver.resolutions")?;
            }
            if s.resolutions.windows(2).any(|w| (0..3).any(|a| w[1][a] <= w[0][a])) {
                return Err(Error::config(
                    "solver.resolutions",
                    "node counts must increase along every axis",
                ));
            }
            check_tol(s.tolerance, "solver.tolerance")?;
            if s.levels.iter().any(|t| !t.is_finite()) {
                return Err(Error::config("solver.levels", "levels must be finite"));
            }
        }
        if let Some(s) = &self.inequality {
            s.truncation.validate("inequality.truncation")?;
            check_nodes(&s.nodes, "inequality.nodes")?;
            check_tol(s.tolerance, "inequality.tolerance")?;
            if let Some(r) = &s.radii {
                check_ladder(r, "inequality.radii")?;
            }
            check_quadrature(s.quadrature, "inequality.quadrature")?;
        }
        if let Some(d) = &self.derivatives {
            if d.points == 0 {
                return Err(Error::config("derivatives.points", "must be positive"));
            }
            if !(d.step > 0.0 && d.extent > d.step && d.margin >= 1.0) {
                return Err(Error::config(
                    "derivatives",
                    "need 0 < step < extent and margin >= 1",
                ));
            }
            for (k, m) in d.also.iter().enumerate() {
                build_metric(m).map_err(|e| e.at(&format!("derivatives.also[{k}]")))?;
            }
        }
        if let Some(s) = &self.scale {
            if !(s.factor > 0.0 && s.factor.is_finite()) {
                return Err(Error::config("scale.factor", "must be positive and finite"));
            }
            s.truncation.validate("scale.truncation")?;
            check_nodes(&s.nodes, "scale.nodes")?;
            check_tol(s.tolerance, "scale.tolerance")?;
            if let Some(r) = &s.radii {
                check_ladder(r, "scale.radii")?;
            }
            check_quadrature(s.quadrature, "scale.quadrature")?;
        }
        Ok(())
    }
}

fn check_ladder(r: &[f64], field: &str) -> Result<()> {
    if r.len() < 3 {
        return Err(Error::config(field, "needs at least 3 entries"));
    }
    if r.iter().any(|v| !(*v > 0.0 && v.is_finite())) || r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(field, "entries must be positive and increasing"));
    }
    Ok(())
}

fn check_nodes(n: &[usize; 3], field: &str) -> Result<()> {
    if n.iter().any(|&k| k < 8) {
        return Err(Error::config(field, "at least 8 nodes per axis"));
    }
    Ok(())
}

fn check_tol(t: f64, field: &str) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::config(field, "must lie in (0, 1)"));
    }
    Ok(())
}

fn check_quadrature(n: usize, field: &str) -> Result<()> {
    if n < 4 {
        return Err(Error::config(field, "at least 4 panels"));
    }
    Ok(())
}

/// Radii from the section or the default ladder for `metric`.
pub fn radii_or_default(radii: &Option<Vec<f64>>, metric: &dyn pmtk_core::metric::MetricField) -> Vec<f64> {
    radii.clone().unwrap_or_else(|| default_radii(metric, 20.0, 4))
}

pub fn quadrature(n: usize) -> MassQuadrature {
    MassQuadrature::with_resolution(n)
}
