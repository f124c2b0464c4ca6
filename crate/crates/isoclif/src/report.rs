//! Structured verification reports shared by every check and the CLI.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    NoStructure,
    Exists,
    Integrable,
    NonIntegrable,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::NoStructure => "NO_STRUCTURE",
            Verdict::Exists => "EXISTS",
            Verdict::Integrable => "INTEGRABLE",
            Verdict::NonIntegrable => "NON_INTEGRABLE",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Real(v)
    }
}
impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Int(v as i64)
    }
}
impl From<i64> for Param {
    fn from(v: i64) -> Self {
        Param::Int(v)
    }
}
impl From<&str> for Param {
    fn from(v: &str) -> Self {
        Param::Text(v.to_string())
    }
}
impl From<String> for Param {
    fn from(v: String) -> Self {
        Param::Text(v)
    }
}
impl From<bool> for Param {
    fn from(v: bool) -> Self {
        Param::Text(v.to_string())
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Int(v) => write!(f, "{v}"),
            Param::Real(v) => write!(f, "{v}"),
            Param::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub parameters: BTreeMap<String, Param>,
    pub residuals: BTreeMap<String, f64>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub tool_version: String,
}

impl VerificationReport {
    pub fn new(check_id: impl Into<String>) -> Self {
        Self {
            check_id: check_id.into(),
            parameters: BTreeMap::new(),
            residuals: BTreeMap::new(),
            verdict: Verdict::Pass,
            witness: None,
            seed: None,
            notes: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Param>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn set_param(&mut self, key: &str, value: impl Into<Param>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    /// Non-finite values are stored as `f64::MAX` so the report stays valid JSON.
    pub fn residual(&mut self, key: &str, value: f64) {
        let v = if value.is_finite() { value } else { f64::MAX };
        self.residuals.insert(key.to_string(), v);
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Report for a check that could not run at all.
    pub fn failed(check_id: impl Into<String>, err: &crate::Error) -> Self {
        let mut r = Self::new(check_id);
        r.verdict = Verdict::Fail;
        r.note(err.to_string());
        r
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.residuals.get(key).copied()
    }
}

/// Outcome of a sampled integrability scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub kind: String,
    pub params: BTreeMap<String, Param>,
    pub n_points: usize,
    pub seed: u64,
    pub h: f64,
    pub max_residual: f64,
    pub verdict: Verdict,
    pub witness: Option<ScanWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanWitness {
    pub point_index: usize,
    pub pair_index: usize,
    pub point: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl From<ScanReport> for VerificationReport {
    fn from(s: ScanReport) -> Self {
        let mut r = VerificationReport::new(format!("nijenhuis.scan.{}", s.kind)).with_seed(s.seed);
        r.parameters = s.params;
        r.set_param("n_points", s.n_points);
        r.set_param("h", s.h);
        r.residual("max_nijenhuis", s.max_residual);
        r.verdict = s.verdict;
        r.witness = s.witness.map(|w| serde_json::to_value(w).expect("witness serializes"));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let mut r = VerificationReport::new("demo").param("t", 0.3).param("l", 4usize).with_seed(7);
        r.residual("x", 1.0 / 3.0);
        r.verdict = Verdict::NonIntegrable;
        let s = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(s.contains("\"NON_INTEGRABLE\""));
    }
}
