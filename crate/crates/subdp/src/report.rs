//! JSON experiment reports.
//!
//! Every command emits exactly one report. A report echoes the resolved
//! configuration including the seed, so re-running it reproduces the same
//! outputs byte for byte; only the timing field varies between runs.
//! Floating-point values round-trip exactly through the serialization
//! (shortest representation that parses back to the same double).

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Self-contained record of one command invocation.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub library_version: &'static str,
    pub subcommand: String,
    /// Resolved configuration, seed included.
    pub config: Value,
    pub seed: u64,
    /// Primary results of the command.
    pub outputs: Value,
    /// Exact value when an oracle ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<Value>,
    /// Absolute estimate error against the oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    /// Wall-clock duration; excluded from reproducibility comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl ExperimentReport {
    pub fn new(subcommand: &str, config: impl Serialize, seed: u64) -> Result<ExperimentReport> {
        Ok(ExperimentReport {
            schema_version: REPORT_SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            outputs: Value::Null,
            truth: None,
            error: None,
            timing_ms: None,
        })
    }

    pub fn set_outputs(&mut self, outputs: impl Serialize) -> Result<()> {
        self.outputs = serde_json::to_value(outputs)?;
        Ok(())
    }

    pub fn set_truth(&mut self, truth: impl Serialize, error: Option<f64>) -> Result<()> {
        self.truth = Some(serde_json::to_value(truth)?);
        self.error = error;
        Ok(())
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// The report without its timing field, for byte-level comparisons.
    pub fn reproducible_json(&self) -> Result<String> {
        let mut clone = self.clone();
        clone.timing_ms = None;
        clone.to_json()
    }
}
