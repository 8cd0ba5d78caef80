//! Versioned JSON artifacts exchanged between pipeline commands.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boosting::StrongClassifier;
use crate::cost::Partition;
use crate::error::{Error, Result};
use crate::runtime::{CascadeModel, EvaluationReport};
use crate::threshold::{bound_thresholds_for, ThresholdVector};

pub const FORMAT_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a classifier's serialized form.
pub fn classifier_digest(classifier: &StrongClassifier) -> String {
    let bytes = serde_json::to_vec(classifier).expect("classifier serializes");
    sha256_hex(&bytes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// SHA-256 of the dataset file the latest step was fit on.
    pub dataset_digest: String,
    pub tool_version: String,
}

impl Provenance {
    pub fn new(seed: u64, dataset_digest: String) -> Self {
        Self {
            seed,
            dataset_digest,
            tool_version: TOOL_VERSION.to_string(),
        }
    }
}

/// One row of the cost-vs-stage-count table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTableRow {
    pub stages: usize,
    pub partition: Vec<usize>,
    pub cost: f64,
    /// Greedy chain cost at the same stage count, when it was computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEnvelope {
    pub format_version: u32,
    pub classifier: StrongClassifier,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdVector>,
    pub cost_c: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_table: Option<Vec<CostTableRow>>,
}

impl ModelEnvelope {
    pub fn new(classifier: StrongClassifier, cost_c: f64, provenance: Provenance) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            classifier,
            partition: None,
            thresholds: None,
            cost_c,
            provenance,
            cost_table: None,
        }
    }

    pub fn classifier_digest(&self) -> String {
        classifier_digest(&self.classifier)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        if !self.classifier.is_canonical() {
            return Err(Error::Parse(
                "classifier weights must be non-increasing and sum to 1".into(),
            ));
        }
        if !(self.cost_c > 0.0 && self.cost_c < 1.0) {
            return Err(Error::RangeError(format!(
                "cost_c = {} must lie in (0, 1)",
                self.cost_c
            )));
        }
        if let Some(p) = &self.partition {
            p.validate(self.classifier.len())?;
            if let Some(t) = &self.thresholds {
                if t.len() != p.len() {
                    return Err(Error::Parse(format!(
                        "{} thresholds for {} stages",
                        t.len(),
                        p.len()
                    )));
                }
            }
        } else if self.thresholds.is_some() {
            return Err(Error::Parse(
                "thresholds present without a partition".into(),
            ));
        }
        Ok(())
    }

    /// The runnable cascade. Missing thresholds default to the bound
    /// thresholds; a missing partition gives the plain strong classifier.
    pub fn cascade(&self) -> Result<CascadeModel> {
        let partition = self.partition.clone().unwrap_or_default();
        let thresholds = match &self.thresholds {
            Some(t) => t.clone(),
            None => bound_thresholds_for(&self.classifier, &partition)?,
        };
        CascadeModel::new(self.classifier.clone(), partition, thresholds, self.cost_c)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Self = serde_json::from_str(text)?;
        env.validate()?;
        Ok(env)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.to_json().as_bytes())
    }
}

/// Structured record of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationReport>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub traces: serde_json::Value,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            evaluation: None,
            traces: serde_json::Value::Null,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.to_json().as_bytes())
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
