//! Declarative dataset schema and its on-disk TOML form.
//!
//! Config format (version 1):
//!
//! ```toml
//! version = 1
//! name = "adult"
//! csv = "../data/adult.csv"          # relative paths resolve against the config file
//! label = "Probability"
//! favorable = ">50K"
//! # missing = "?"                    # optional, default "?"
//!
//! [[feature]]
//! name = "age"
//! kind = "numeric"                   # or "categorical"
//!
//! [[protected]]
//! column = "sex"
//! privileged = ["Male"]              # value-set rule
//! # unprivileged = ["Female"]        # optional; when given, any other value is an error
//!
//! [[protected]]
//! column = "age"
//! privileged_below = 60.0            # threshold rule: privileged iff value < threshold
//!
//! [[filter]]                         # optional raw-value row filters, applied before encoding
//! column = "days_b_screening_arrest"
//! op = "<="                          # == != <= >= < >
//! value = "30"
//! ```
//!
//! Raw CSV values are whitespace-trimmed before any comparison.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub kind: FeatureKind,
}

/// Deterministic mapping from a raw value to privileged / unprivileged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrivilegedRule {
    /// Privileged iff the numeric value is strictly below the threshold.
    Below { privileged_below: f64 },
    /// Privileged iff the numeric value is at least the threshold.
    AtLeast { privileged_at_least: f64 },
    /// Privileged iff the raw value is in `privileged`. When `unprivileged`
    /// is also listed, a value in neither set is a data error.
    ValueIn {
        privileged: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unprivileged: Option<Vec<String>>,
    },
}

impl PrivilegedRule {
    /// Map one raw (trimmed) value to an indicator: privileged = 1.
    pub fn apply(&self, attribute: &str, value: &str) -> Result<u8> {
        match self {
            PrivilegedRule::ValueIn {
                privileged,
                unprivileged,
            } => {
                if privileged.iter().any(|v| v == value) {
                    return Ok(1);
                }
                if let Some(unpriv) = unprivileged {
                    if !unpriv.iter().any(|v| v == value) {
                        return Err(Error::NonBinaryProtected {
                            attribute: attribute.to_string(),
                            value: value.to_string(),
                        });
                    }
                }
                Ok(0)
            }
            PrivilegedRule::Below { privileged_below } => {
                let x: f64 = value.parse().map_err(|_| Error::NonBinaryProtected {
                    attribute: attribute.to_string(),
                    value: value.to_string(),
                })?;
                Ok(u8::from(x < *privileged_below))
            }
            PrivilegedRule::AtLeast { privileged_at_least } => {
                let x: f64 = value.parse().map_err(|_| Error::NonBinaryProtected {
                    attribute: attribute.to_string(),
                    value: value.to_string(),
                })?;
                Ok(u8::from(x >= *privileged_at_least))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectedAttribute {
    pub column: String,
    #[serde(flatten)]
    pub rule: PrivilegedRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

/// A raw-value predicate applied before encoding. Comparisons are numeric
/// when both sides parse as numbers, otherwise lexicographic on the raw
/// strings; a row whose value fails the comparison (or fails to parse when
/// a numeric comparison is required) is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFilter {
    pub column: String,
    pub op: Comparator,
    pub value: String,
}

impl RowFilter {
    pub fn keeps(&self, raw: &str) -> bool {
        let ord = match (raw.parse::<f64>(), self.value.parse::<f64>()) {
            (Ok(a), Ok(b)) => a.partial_cmp(&b),
            _ => Some(raw.cmp(self.value.as_str())),
        };
        let Some(ord) = ord else { return false };
        match self.op {
            Comparator::Eq => ord.is_eq(),
            Comparator::Ne => ord.is_ne(),
            Comparator::Le => ord.is_le(),
            Comparator::Ge => ord.is_ge(),
            Comparator::Lt => ord.is_lt(),
            Comparator::Gt => ord.is_gt(),
        }
    }
}

fn default_missing() -> String {
    "?".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub version: u64,
    pub name: String,
    #[serde(rename = "csv")]
    pub csv_path: PathBuf,
    #[serde(rename = "label")]
    pub label_column: String,
    #[serde(rename = "favorable")]
    pub favorable_value: String,
    #[serde(rename = "feature")]
    pub feature_columns: Vec<FeatureColumn>,
    #[serde(rename = "protected")]
    pub protected: Vec<ProtectedAttribute>,
    #[serde(rename = "missing", default = "default_missing")]
    pub missing_token: String,
    #[serde(rename = "filter", default, skip_serializing_if = "Vec::is_empty")]
    pub row_filters: Vec<RowFilter>,
}

impl DatasetSpec {
    /// Parse a config file; relative `csv` paths resolve against the
    /// config file's directory.
    pub fn from_toml_file(path: &Path) -> Result<DatasetSpec> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut spec: DatasetSpec =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if spec.csv_path.is_relative() {
            if let Some(dir) = path.parent() {
                spec.csv_path = dir.join(&spec.csv_path);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.protected.is_empty() || self.protected.len() > 2 {
            return Err(Error::Config(format!(
                "need 1 or 2 protected attributes, got {}",
                self.protected.len()
            )));
        }
        if self
            .feature_columns
            .iter()
            .any(|f| f.name == self.label_column)
        {
            return Err(Error::Config(format!(
                "label column `{}` must not appear in feature_columns",
                self.label_column
            )));
        }
        if self
            .protected
            .iter()
            .any(|p| p.column == self.label_column)
        {
            return Err(Error::Config(
                "label column cannot be a protected attribute".into(),
            ));
        }
        let mut names: Vec<&str> = self.protected.iter().map(|p| p.column.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.protected.len() {
            return Err(Error::Config("duplicate protected attribute".into()));
        }
        Ok(())
    }

    pub fn protected_names(&self) -> Vec<&str> {
        self.protected.iter().map(|p| p.column.as_str()).collect()
    }
}
