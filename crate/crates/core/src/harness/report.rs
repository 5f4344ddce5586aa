use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// What a check expects of its residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    /// `max residual ≤ tol`.
    Zero,
    /// `max residual > threshold` at some point.
    Nonzero { threshold: f64 },
}

/// One residual measured at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: String,
    pub tag: String,
    pub value: f64,
    pub expect: Expect,
    /// Tighter tolerance than the suite's own, if any.
    pub tol: Option<f64>,
}

impl Residual {
    pub fn zero(name: impl Into<String>, tag: impl Into<String>, value: f64) -> Self {
        Residual { name: name.into(), tag: tag.into(), value, expect: Expect::Zero, tol: None }
    }

    pub fn nonzero(name: impl Into<String>, tag: impl Into<String>, value: f64, threshold: f64) -> Self {
        Residual { name: name.into(), tag: tag.into(), value, expect: Expect::Nonzero { threshold }, tol: None }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Aggregate of one named check over all points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub tag: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub expect: Expect,
    pub samples: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    pub fn not_applicable(name: impl Into<String>, tag: impl Into<String>, note: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            tag: tag.into(),
            max_residual: 0.0,
            tolerance: 0.0,
            expect: Expect::Zero,
            samples: 0,
            status: Status::NotApplicable,
            note: Some(note.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Result of one suite on one chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub chart: String,
    pub seed: u64,
    pub trials: usize,
    pub points: Vec<Vec<f64>>,
    /// Free-form per-point facts, such as genericity rank or classification.
    pub summary: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.expect == Expect::Zero && c.status != Status::NotApplicable)
            .map(|c| c.max_residual)
            .fold(0.0, f64::max)
    }
}

/// Folds per-point residual lists into one result per name, keeping the
/// first-seen order. NaN residuals count as failures.
pub fn aggregate(per_point: &[Vec<Residual>], tol: f64) -> Vec<CheckResult> {
    let mut out: Vec<CheckResult> = Vec::new();
    for r in per_point.iter().flatten() {
        let value = if r.value.is_nan() { f64::INFINITY } else { r.value };
        match out.iter_mut().find(|c| c.name == r.name) {
            Some(c) => {
                c.max_residual = c.max_residual.max(value);
                c.samples += 1;
            }
            None => out.push(CheckResult {
                name: r.name.clone(),
                tag: r.tag.clone(),
                max_residual: value,
                tolerance: r.tol.map_or(tol, |t| t.min(tol)),
                expect: r.expect,
                samples: 1,
                status: Status::Pass,
                note: None,
            }),
        }
    }
    for c in &mut out {
        let ok = match c.expect {
            Expect::Zero => c.max_residual <= c.tolerance,
            Expect::Nonzero { threshold } => c.max_residual > threshold,
        };
        c.status = if ok { Status::Pass } else { Status::Fail };
    }
    out
}
