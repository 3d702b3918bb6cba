use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every numerical threshold used by a run, passed explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Bisection convergence width.
    pub root_tol: f64,
    /// Acceptance threshold for equilaterality and inscribedness certificates.
    pub verify_tol: f64,
    /// Strictness band: `D > 1` is certified as `D >= 1 + margin_tol`.
    pub margin_tol: f64,
}

/// Bisection iteration cap shared by all root finders.
pub const BISECTION_CAP: usize = 200;

/// Grid size for the sign-change scan that precedes every bisection.
pub const SCAN_POINTS: usize = 1024;

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            root_tol: 1e-10,
            verify_tol: 1e-7,
            margin_tol: 1e-6,
        }
    }
}

impl Tolerance {
    pub fn new(root_tol: f64, verify_tol: f64, margin_tol: f64) -> Result<Self> {
        let tol = Self {
            root_tol,
            verify_tol,
            margin_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.root_tol, self.verify_tol, self.margin_tol];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidTolerance(
                "all tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.root_tol > self.verify_tol {
            return Err(Error::InvalidTolerance(format!(
                "root_tol {} exceeds verify_tol {}",
                self.root_tol, self.verify_tol
            )));
        }
        Ok(())
    }

    /// Same tolerances with a different acceptance threshold.
    pub fn with_verify_tol(mut self, verify_tol: f64) -> Result<Self> {
        self.verify_tol = verify_tol;
        self.validate()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerance::default().validate().unwrap();
    }

    #[test]
    fn ordering_enforced() {
        assert!(Tolerance::new(1e-6, 1e-8, 1e-6).is_err());
        assert!(Tolerance::new(0.0, 1e-8, 1e-6).is_err());
        assert!(Tolerance::new(1e-10, 1e-7, f64::NAN).is_err());
    }
}
