use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use hardylab::basis::BasisError;
use hardylab::circle::CircleError;
use hardylab::function::{ClassifyError, EvalError};
use hardylab::hk::{HkError, HkOutcome};
use hardylab::represent::RepresentError;

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::ManifestEntry;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// `None` when the check was skipped.
    pub pass: Option<bool>,
    pub measured: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: &str, pass: bool, measured: impl Into<Value>) -> Self {
        Check { name: name.into(), pass: Some(pass), measured: measured.into(), limit: None, note: None }
    }

    pub fn limit(mut self, limit: impl Into<Value>) -> Self {
        self.limit = Some(limit.into());
        self
    }

    pub fn skipped(name: &str, note: impl Into<String>) -> Self {
        Check { name: name.into(), pass: None, measured: Value::Null, limit: None, note: Some(note.into()) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    BudgetExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: String,
    pub config: ExperimentConfig,
    pub outcome: Outcome,
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    /// Every file written by the run except this report and the checksum list.
    pub manifest: Vec<ManifestEntry>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass != Some(false))
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Compute(String),
    #[error("{0}")]
    Budget(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Compute(_) | RunError::Io(_) => 3,
            RunError::Budget(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Compute(_) => "compute",
            RunError::Budget(_) => "budget",
            RunError::Io(_) => "io",
        }
    }

    /// One-line JSON for stderr.
    pub fn structured(&self) -> String {
        serde_json::json!({ "status": "error", "kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() })
            .to_string()
    }
}

impl From<EvalError> for RunError {
    fn from(e: EvalError) -> Self {
        RunError::Compute(e.to_string())
    }
}

impl From<ClassifyError> for RunError {
    fn from(e: ClassifyError) -> Self {
        RunError::Compute(e.to_string())
    }
}

impl From<BasisError> for RunError {
    fn from(e: BasisError) -> Self {
        match e {
            BasisError::Capacity { .. } => RunError::Budget(e.to_string()),
            _ => RunError::Compute(e.to_string()),
        }
    }
}

impl From<CircleError> for RunError {
    fn from(e: CircleError) -> Self {
        match e {
            CircleError::PanelBudget { .. } | CircleError::Capacity { .. } => RunError::Budget(e.to_string()),
            _ => RunError::Compute(e.to_string()),
        }
    }
}

impl From<HkError> for RunError {
    fn from(e: HkError) -> Self {
        match e {
            HkError::TooLarge { .. } => RunError::Budget(e.to_string()),
            _ => RunError::Compute(e.to_string()),
        }
    }
}

impl From<RepresentError> for RunError {
    fn from(e: RepresentError) -> Self {
        match e {
            RepresentError::HkUnsolved { outcome: HkOutcome::BudgetExceeded { .. }, .. } => {
                RunError::Budget(e.to_string())
            }
            RepresentError::Hk(h) => h.into(),
            _ => RunError::Compute(e.to_string()),
        }
    }
}
