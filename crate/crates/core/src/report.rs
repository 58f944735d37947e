//! Structured JSON reports shared by every subcommand.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Accepted on the user's word; not machine-checked.
    Attested,
}

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub name: String,
    pub verdict: Verdict,
    pub evidence: Value,
    pub notes: String,
}

impl Record {
    pub fn new(name: &str, verdict: Verdict, evidence: Value, notes: impl Into<String>) -> Self {
        Self { name: name.to_string(), verdict, evidence, notes: notes.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub section: String,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub metadata: Value,
}

impl Report {
    pub fn new(section: &str) -> Self {
        Self { schema_version: SCHEMA_VERSION.into(), section: section.into(), records: Vec::new(), metadata: Value::Null }
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn any_fail(&self) -> bool {
        self.records.iter().any(|r| r.verdict == Verdict::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}
