//! Pass/fail reports shared by all identity checks.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub indices: Vec<usize>,
    pub detail: String,
}

/// Outcome of one named identity check. Empty `failures` means pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: &'static str,
    pub failures: Vec<Failure>,
}

impl CheckReport {
    pub fn new(check: &'static str) -> Self {
        CheckReport {
            check,
            failures: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn fail(&mut self, indices: Vec<usize>, detail: impl Into<String>) {
        self.failures.push(Failure {
            indices,
            detail: detail.into(),
        });
    }

    /// Records a failure unless `holds`.
    pub fn expect(&mut self, holds: bool, indices: Vec<usize>, detail: impl FnOnce() -> String) {
        if !holds {
            self.fail(indices, detail());
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "{}: pass", self.check);
        }
        write!(f, "{}: FAIL ({} failures)", self.check, self.failures.len())?;
        for x in self.failures.iter().take(5) {
            write!(f, "\n  at {:?}: {}", x.indices, x.detail)?;
        }
        if self.failures.len() > 5 {
            write!(f, "\n  ...")?;
        }
        Ok(())
    }
}
