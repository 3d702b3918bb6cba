use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Boundary-equality case: inside the tolerance band around the strict
    /// threshold, neither certified nor refuted.
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Degenerate => "degenerate",
        })
    }
}

/// Outcome of a certificate check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub name: String,
    pub verdict: Verdict,
    pub worst_residual: f64,
    /// The tolerance the verdict was decided against.
    pub tolerance: f64,
    /// The worst-violating item (pair, level, height...).
    pub witness: String,
    /// Headline quantity of the check (common distance, `2t*`, ...), if any.
    pub value: Option<f64>,
    pub details: Vec<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub(crate) fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub(crate) fn from_residual(
        name: &str,
        worst_residual: f64,
        tolerance: f64,
        witness: String,
        details: Vec<String>,
    ) -> Self {
        let verdict = if worst_residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.to_string(),
            verdict,
            worst_residual,
            tolerance,
            witness,
            value: None,
            details,
        }
    }
}
