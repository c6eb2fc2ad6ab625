//! Deterministic experiment reports.
//!
//! Reports serialize to JSON with sorted keys and no timing information,
//! so reruns with the same configuration and seed are byte-identical for
//! any worker count. Wall time is printed to the console only.

use serde::Serialize;
use std::collections::BTreeMap;

/// One machine-checkable pass/fail line.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    /// Measured quantities, sorted by key.
    pub measured: BTreeMap<String, f64>,
    /// Tolerance or threshold the check was held to, when meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, passed: bool) -> Self {
        CheckLine {
            name: name.into(),
            passed,
            measured: BTreeMap::new(),
            tolerance: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.measured.insert(key.into(), value);
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }
}

/// Full report of one experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub experiment: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<CheckLine>,
    pub passed: bool,
}

impl Report {
    pub fn new(experiment: &str, seed: u64, config: BTreeMap<String, String>) -> Self {
        Report {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            seed,
            config,
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, check: CheckLine) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    /// 1-based index of the first failing check, if any.
    pub fn first_failure(&self) -> Option<usize> {
        self.checks.iter().position(|c| !c.passed).map(|i| i + 1)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialization");
        out.push('\n');
        out
    }
}

/// Everything an experiment produces: the report plus named text outputs.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// `(file name, contents)` pairs; CSVs carry a schema comment line.
    pub csv_files: Vec<(String, String)>,
    pub svg_files: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(report: Report) -> Self {
        Outcome {
            report,
            csv_files: Vec::new(),
            svg_files: Vec::new(),
        }
    }
}

/// Starts a CSV body with the versioned schema comment.
pub fn csv_header(name: &str, columns: &str) -> String {
    format!("# aniso-csv v1: {name}\n{columns}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_json_is_stable_and_tracks_failures() {
        let mut r = Report::new("demo", 1, BTreeMap::new());
        r.push(CheckLine::new("a", true).with("x", 1.5));
        r.push(CheckLine::new("b", false).with("y", -2.0).tolerance(0.1));
        r.push(CheckLine::new("c", false));
        assert!(!r.passed);
        assert_eq!(r.first_failure(), Some(2));
        let j1 = r.to_json();
        let j2 = r.to_json();
        assert_eq!(j1, j2);
        assert!(j1.contains("\"tolerance\": 0.1"));
    }
}
