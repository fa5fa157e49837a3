//! The four-word result vocabulary shared by every witness and validator.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Skip,
    Fail,
    Measured,
}

impl Status {
    pub const ALL: [Status; 4] = [Status::Pass, Status::Skip, Status::Fail, Status::Measured];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Skip => "SKIP",
            Status::Fail => "FAIL",
            Status::Measured => "MEASURED",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one check.
///
/// FAIL reasons start with a stable clause name (`stdout-mismatch`,
/// `exit-code`, ...) optionally followed by `: detail`. SKIP reasons carry
/// the missing tools. MEASURED is representable but no built-in suite
/// produces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Skip { reason: String },
    Fail { reason: String },
    Measured { note: String },
}

impl Outcome {
    pub fn skip(reason: impl Into<String>) -> Self {
        Outcome::Skip {
            reason: reason.into(),
        }
    }

    pub fn fail(reason: impl Into<String>) -> Self {
        Outcome::Fail {
            reason: reason.into(),
        }
    }

    /// FAIL whose reason is `clause: detail`.
    pub fn fail_with(clause: &str, detail: impl fmt::Display) -> Self {
        Outcome::Fail {
            reason: format!("{clause}: {detail}"),
        }
    }

    pub fn status(&self) -> Status {
        match self {
            Outcome::Pass => Status::Pass,
            Outcome::Skip { .. } => Status::Skip,
            Outcome::Fail { .. } => Status::Fail,
            Outcome::Measured { .. } => Status::Measured,
        }
    }

    /// Reason for SKIP/FAIL, note for MEASURED, empty for PASS.
    pub fn reason(&self) -> &str {
        match self {
            Outcome::Pass => "",
            Outcome::Skip { reason } | Outcome::Fail { reason } => reason,
            Outcome::Measured { note } => note,
        }
    }

    /// Leading clause of a FAIL reason (`stdout-mismatch` for
    /// `stdout-mismatch: expected 14 bytes, got 13`).
    pub fn fail_clause(&self) -> Option<&str> {
        match self {
            Outcome::Fail { reason } => Some(reason.split(':').next().unwrap_or(reason).trim()),
            _ => None,
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Outcome::Fail { .. })
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Outcome::Skip { .. })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reason() {
            "" => write!(f, "{}", self.status()),
            reason => write!(f, "{} ({reason})", self.status()),
        }
    }
}

/// Counts over one suite plus the outcome of each attempted subject.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub pass: usize,
    pub skip: usize,
    pub fail: usize,
    pub measured: usize,
    pub per_unit: BTreeMap<String, Outcome>,
}

impl RunSummary {
    pub fn from_outcomes<I, K>(outcomes: I) -> Self
    where
        I: IntoIterator<Item = (K, Outcome)>,
        K: Into<String>,
    {
        let mut summary = RunSummary::default();
        for (key, outcome) in outcomes {
            summary.record(key, outcome);
        }
        summary
    }

    pub fn record(&mut self, key: impl Into<String>, outcome: Outcome) {
        let key = key.into();
        if let Some(previous) = self.per_unit.remove(&key) {
            self.bump(previous.status(), false);
        }
        self.bump(outcome.status(), true);
        self.per_unit.insert(key, outcome);
    }

    fn bump(&mut self, status: Status, up: bool) {
        let slot = match status {
            Status::Pass => &mut self.pass,
            Status::Skip => &mut self.skip,
            Status::Fail => &mut self.fail,
            Status::Measured => &mut self.measured,
        };
        if up {
            *slot += 1;
        } else {
            *slot -= 1;
        }
    }

    pub fn attempted(&self) -> usize {
        self.per_unit.len()
    }

    /// True when something was attempted and every attempt was skipped.
    pub fn all_skipped(&self) -> bool {
        self.skip > 0 && self.skip == self.attempted()
    }

    /// `N pass, M skip, K fail`
    pub fn counts_line(&self) -> String {
        format!("{} pass, {} skip, {} fail", self.pass, self.skip, self.fail)
    }
}
