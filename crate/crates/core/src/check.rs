//! Pass/fail records for the self-verification suites.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `worst <= tolerance`.
    pub fn at_most(name: impl Into<String>, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: worst <= tolerance,
            worst,
            tolerance,
        }
    }

    /// Passes when `worst >= tolerance`.
    pub fn at_least(name: impl Into<String>, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: worst >= tolerance,
            worst,
            tolerance,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
