//! Run records (one JSON object per line) and verdicts.

use std::collections::BTreeMap;
use std::fmt;

use pmtk_core::geometry::DerivativeReport;
use pmtk_core::inequality::{CoareaReport, IdentityDefect, InequalityReport, LevelComponents};
use pmtk_core::mass::MassReport;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    /// The rule does not apply (energy conditions failed, ladder too short).
    Skipped,
    /// The pipeline stage feeding the rule raised an error.
    Errored,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
            Status::Errored => "ERRORED",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    /// Name of the acceptance rule, e.g. `mass.extrapolation`.
    pub rule: String,
    pub status: Status,
    pub value: f64,
    pub threshold: f64,
    pub note: String,
}

impl VerdictRecord {
    /// Pass iff `value <= threshold`.
    pub fn at_most(rule: &str, value: f64, threshold: f64, note: impl Into<String>) -> Self {
        VerdictRecord {
            rule: rule.into(),
            status: if value <= threshold { Status::Pass } else { Status::Fail },
            value,
            threshold,
            note: note.into(),
        }
    }

    /// Pass iff `value >= threshold`.
    pub fn at_least(rule: &str, value: f64, threshold: f64, note: impl Into<String>) -> Self {
        VerdictRecord {
            rule: rule.into(),
            status: if value >= threshold { Status::Pass } else { Status::Fail },
            value,
            threshold,
            note: note.into(),
        }
    }

    pub fn with_status(rule: &str, status: Status, note: impl Into<String>) -> Self {
        VerdictRecord {
            rule: rule.into(),
            status,
            value: f64::NAN,
            threshold: f64::NAN,
            note: note.into(),
        }
    }
}

/// How the values of an observable are turned into orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Series {
    /// Errors against an exact value of zero.
    Errors,
    /// Values with an unknown limit; orders use successive differences.
    Values,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub series: Series,
    pub values: Vec<f64>,
}

/// One observable per row, one ladder rung per column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub ladder: Vec<String>,
    pub observables: Vec<Observable>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RungRecord {
    pub nodes: [usize; 3],
    pub unknowns: usize,
    pub iterations: usize,
    pub residual: f64,
    pub min_gradient: f64,
    pub bulk: f64,
    pub boundary: f64,
    pub identity: IdentityDefect,
    pub coarea: CoareaReport,
    pub levels: Vec<LevelComponents>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverRecord {
    pub rungs: Vec<RungRecord>,
    pub negative_control: Option<LevelComponents>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeRecord {
    pub metric: String,
    pub report: DerivativeReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleRecord {
    pub factor: f64,
    pub mass: [MassReport; 2],
    /// `B + S` for the unscaled and the scaled metric.
    pub rhs: [f64; 2],
    pub bulk: [f64; 2],
    pub boundary: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatRecord {
    /// `max |u - x3|` over active nodes.
    pub field_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub toolkit_version: String,
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub workers: usize,
    pub metric: String,
    pub config: ExperimentConfig,
    /// Wall-clock seconds per stage; excluded from determinism comparisons.
    pub timings: BTreeMap<String, f64>,
    pub mass: Vec<MassReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<InequalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat: Option<FlatRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub derivatives: Vec<DerivativeRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleRecord>,
    pub verdicts: Vec<VerdictRecord>,
}

impl RunRecord {
    pub fn verdict(&self, rule: &str) -> Option<&VerdictRecord> {
        self.verdicts.iter().find(|v| v.rule == rule)
    }

    pub fn failed(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Fail)
    }

    pub fn errored(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Errored)
    }

    /// 0 when every verdict passed or was skipped, 1 on a failed verdict,
    /// 3 when a stage errored.
    pub fn exit_code(&self) -> i32 {
        if self.errored() {
            3
        } else if self.failed() {
            1
        } else {
            0
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records are serializable")
    }
}
