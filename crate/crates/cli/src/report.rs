//! Report envelope shared by every command. Reports carry no timestamps, so identical
//! inputs give byte-identical JSON.

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// One check with its verdict and, for failures, where it failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub check: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub detail: String,
}

impl Record {
    pub fn new(check: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Record { check: check.into(), passed, x: None, value: None, detail: detail.into() }
    }

    pub fn at(mut self, x: f64, value: f64) -> Self {
        self.x = Some(x);
        self.value = Some(value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub failed: usize,
    pub verdict: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Command-specific payload.
    #[serde(flatten)]
    pub body: Map<String, Value>,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, config_hash: String, seed: Option<u64>) -> Self {
        Report {
            tool: "factorineq",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config_hash,
            seed,
            body: Map::new(),
            records: Vec::new(),
            summary: Summary { checks: 0, failed: 0, verdict: "pass" },
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.body.insert(key.to_string(), serde_json::to_value(value).expect("report field serializes"));
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
        self.summary.checks = self.records.len();
        self.summary.failed = self.records.iter().filter(|r| !r.passed).count();
        self.summary.verdict = if self.summary.failed == 0 { "pass" } else { "fail" };
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned text rendering of the records.
    pub fn to_text(&self) -> String {
        let width = self.records.iter().map(|r| r.check.len()).max().unwrap_or(0);
        let mut out = String::new();
        for r in &self.records {
            let tag = if r.passed { "pass" } else { "FAIL" };
            out.push_str(&format!("{tag}  {:<width$}  {}", r.check, r.detail));
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {} of {} checks failed\n",
            self.summary.verdict, self.summary.failed, self.summary.checks
        ));
        out
    }
}
