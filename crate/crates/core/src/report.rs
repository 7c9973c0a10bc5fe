//! Verification reports: per-identity residual breakdowns with a
//! machine-readable verdict.

use serde::{Deserialize, Serialize};

use crate::matrix::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "hypotheses-not-met")]
    HypothesesNotMet,
}

/// One named residual check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

impl HypothesisCheck {
    pub fn new(name: impl Into<String>, residual: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            residual,
            pass,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub formula: String,
    pub verdict: Verdict,
    pub deviation: f64,
    pub hypotheses: Vec<HypothesisCheck>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub formula_output: Option<ComplexMatrix>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_output: Option<ComplexMatrix>,
}

impl VerificationReport {
    pub fn new(formula: impl Into<String>) -> Self {
        Self {
            formula: formula.into(),
            verdict: Verdict::Pass,
            deviation: 0.0,
            hypotheses: Vec::new(),
            seed: None,
            family: None,
            formula_output: None,
            oracle_output: None,
        }
    }

    pub fn push_check(&mut self, name: impl Into<String>, residual: f64, pass: bool) {
        self.hypotheses.push(HypothesisCheck::new(name, residual, pass));
    }

    pub fn hypotheses_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.pass)
    }

    pub fn failing_hypothesis(&self) -> Option<&HypothesisCheck> {
        self.hypotheses.iter().find(|h| !h.pass)
    }

    pub fn with_provenance(mut self, family: impl Into<String>, seed: u64) -> Self {
        self.family = Some(family.into());
        self.seed = Some(seed);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
