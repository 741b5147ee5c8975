//! Run manifests: the seed-determined portion is embedded as comment lines
//! in every CSV so that identical settings reproduce identical bytes; the
//! full manifest (including wall-clock duration and worker count, which are
//! not functions of the seed) goes to `run_manifest.json`.

use serde::Serialize;
use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seed-determined settings shared by every artifact of a run.
#[derive(Debug, Clone, Serialize)]
pub struct DeterministicManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Flat `key=value` list of resolved configuration, in emission order.
    pub config: Vec<(String, String)>,
}

impl DeterministicManifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            config: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.config.push((key.to_string(), value.to_string()));
    }

    /// `#`-prefixed header block for CSV and Markdown artifacts.
    pub fn header_lines(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# eqmht {} v{}", self.command, self.version);
        let mut line = String::from("#");
        if let Some(seed) = self.seed {
            let _ = write!(line, " seed={seed}");
        }
        for (k, v) in &self.config {
            let _ = write!(line, " {k}={v}");
        }
        let _ = writeln!(out, "{line}");
        out
    }
}

/// Full manifest written once per run directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub deterministic: DeterministicManifest,
    pub workers: usize,
    pub duration_secs: f64,
    /// Per-artifact exclusion counts (degenerate replications dropped).
    pub artifacts: Vec<ArtifactRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub excluded_replications: usize,
}

pub fn fmt9(x: f64) -> String {
    format!("{x:.9}")
}

/// Shortest clean rendering for grid values like tau, p, rho.
pub fn fmt_plain(x: f64) -> String {
    format!("{x}")
}
