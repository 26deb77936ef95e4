//! Stable JSON report envelope shared by all CLI commands.

use serde::{Deserialize, Serialize};

/// Envelope around every command's output. Field order is fixed by struct
/// order; floats inside `results` are either plain f64 diagnostics or
/// [`crate::LogReal`] values carrying their own `log_domain` marker.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    /// The subcommand and its parsed arguments, echoed.
    pub command: String,
    pub params: serde_json::Value,
    pub results: serde_json::Value,
    /// Precondition failures, paper-discrepancy notes, fallback notices.
    pub warnings: Vec<String>,
    pub version: String,
    /// Present for randomized commands (power iteration, sampling).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

impl Report {
    pub fn new(command: &str, params: serde_json::Value, results: serde_json::Value) -> Report {
        Report {
            command: command.to_string(),
            params,
            results,
            warnings: Vec::new(),
            version: TOOL_VERSION.to_string(),
            seed: None,
        }
    }

    pub fn warn(mut self, msg: impl Into<String>) -> Report {
        self.warnings.push(msg.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Report {
        self.seed = Some(seed);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
