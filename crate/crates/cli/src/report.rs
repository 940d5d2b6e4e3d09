//! The JSON report document shared by every table command.

use bookmaker::confidence::{Comparison, ConfidenceInterval};
use bookmaker::dichotomous::BinaryStats;
use bookmaker::multiclass::MulticlassStats;
use bookmaker::significance::{PosthocCalibration, SignificanceReport};
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub command: String,
    pub inputs: Vec<InputDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    #[serde(default)]
    pub significance: Vec<SignificanceEntry>,
    #[serde(default)]
    pub confidence: Vec<ConfidenceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ReportDocument {
    pub fn new(command: &str, inputs: Vec<InputDescriptor>) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            inputs,
            metrics: None,
            significance: Vec::new(),
            confidence: Vec::new(),
            comparison: None,
            seed: None,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Table,
    Pairs,
    /// Summary values given on the command line.
    Values,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub format: InputFormat,
    pub labels: Vec<String>,
    pub n: u64,
    /// Rows predicted, columns real, after any margin repair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<u64>>>,
    #[serde(default)]
    pub margins_repaired: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InformationUnit {
    Nats,
    Bits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub information_unit: InformationUnit,
    /// Present only for 2×2 tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary: Option<BinaryStats>,
    pub multiclass: MulticlassStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceEntry {
    #[serde(flatten)]
    pub report: SignificanceReport,
    pub p_value_alt: f64,
    pub alpha: f64,
    pub significant: bool,
    /// Bound on posterior odds, when p lies in (0, 1/e).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<PosthocCalibration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceEntry {
    pub system: String,
    pub observed: f64,
    pub interval: ConfidenceInterval,
    pub lo: f64,
    pub hi: f64,
    pub contains_observed: bool,
}

impl ConfidenceEntry {
    pub fn new(system: &str, observed: f64, interval: ConfidenceInterval) -> Self {
        Self {
            system: system.to_string(),
            observed,
            interval,
            lo: interval.lo(),
            hi: interval.hi(),
            contains_observed: interval.contains(observed),
        }
    }
}
