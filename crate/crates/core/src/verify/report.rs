//! Named checks and the append-only report that collects them.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    /// Recorded only; never fails.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check {
            check: name.into(),
            measured,
            threshold,
            comparison: Comparison::AtMost,
            pass: measured <= threshold,
            detail: None,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check {
            check: name.into(),
            measured,
            threshold,
            comparison: Comparison::AtLeast,
            pass: measured >= threshold,
            detail: None,
        }
    }

    pub fn info(name: impl Into<String>, measured: f64) -> Self {
        Check {
            check: name.into(),
            measured,
            threshold: 0.0,
            comparison: Comparison::Info,
            pass: true,
            detail: None,
        }
    }

    /// A check that failed or passed for a reason other than a comparison.
    pub fn flag(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            check: name.into(),
            measured: if pass { 1.0 } else { 0.0 },
            threshold: 1.0,
            comparison: Comparison::AtLeast,
            pass,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub config_hash: String,
    checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(config_hash: impl Into<String>) -> Self {
        VerificationReport {
            version: crate::VERSION.to_string(),
            config_hash: config_hash.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.check == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Check::at_most("a", 1.0, 2.0).pass);
        assert!(!Check::at_most("a", f64::NAN, 2.0).pass);
        assert!(!Check::at_least("b", 1.0, 2.0).pass);
        assert!(Check::info("c", f64::INFINITY).pass);
        let mut r = VerificationReport::new("abc");
        r.push(Check::at_most("x", 3.0, 1.0));
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
        assert_eq!(r.version, crate::VERSION);
    }
}
