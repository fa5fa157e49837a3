//! Evidence report: one row per executed check, per-suite summaries, the
//! readiness-gate decision, and human/machine rendering.

pub mod gate;
pub mod suites;

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use crate::outcome::{Outcome, RunSummary, Status};

pub use gate::{evaluate_gate, GateDecision, GateResult, UnknownClaim};
pub use suites::*;

pub const GATE_SUITE: &str = "gate";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub suite: String,
    /// Contract id or validator name.
    pub check: String,
    /// Unit, entity, file, or named sub-check.
    pub subject: String,
    pub status: Status,
    pub reason: String,
}

impl Row {
    pub fn new(suite: &str, check: &str, subject: &str, outcome: &Outcome) -> Self {
        Row {
            suite: suite.to_string(),
            check: check.to_string(),
            subject: subject.to_string(),
            status: outcome.status(),
            reason: outcome.reason().to_string(),
        }
    }
}

/// Rows of one suite plus its summary. `summary` counts subjects, which
/// for the runtime suite are units rather than unit x contract rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteRows {
    pub name: String,
    pub rows: Vec<Row>,
    pub summary: RunSummary,
}

impl SuiteRows {
    /// Summary keyed by row subject.
    pub fn from_rows(name: &str, rows: Vec<Row>) -> Self {
        let summary =
            RunSummary::from_outcomes(rows.iter().map(|r| (r.subject.clone(), row_outcome(r))));
        SuiteRows {
            name: name.to_string(),
            rows,
            summary,
        }
    }
}

fn row_outcome(r: &Row) -> Outcome {
    match r.status {
        Status::Pass => Outcome::Pass,
        Status::Skip => Outcome::Skip {
            reason: r.reason.clone(),
        },
        Status::Fail => Outcome::Fail {
            reason: r.reason.clone(),
        },
        Status::Measured => Outcome::Measured {
            note: r.reason.clone(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceReport {
    /// As given by the caller, so reports do not embed machine paths.
    pub bundle_root: String,
    pub suites: Vec<SuiteRows>,
    pub gate: Option<GateDecision>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Machine,
}

impl EvidenceReport {
    pub fn new(bundle_root: impl Into<String>) -> Self {
        EvidenceReport {
            bundle_root: bundle_root.into(),
            suites: Vec::new(),
            gate: None,
        }
    }

    pub fn push(&mut self, suite: SuiteRows) {
        self.suites.push(suite);
    }

    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.suites.iter().flat_map(|s| s.rows.iter())
    }

    pub fn summaries(&self) -> BTreeMap<&str, &RunSummary> {
        self.suites
            .iter()
            .map(|s| (s.name.as_str(), &s.summary))
            .collect()
    }

    pub fn fail_rows(&self) -> usize {
        self.rows().filter(|r| r.status == Status::Fail).count()
    }

    /// Record a gate decision and add its rows, so a failed gate is a FAIL
    /// row like any other.
    pub fn set_gate(&mut self, decision: GateDecision) {
        let rows = decision
            .gates
            .iter()
            .map(|g| {
                let outcome = if g.status == Status::Pass {
                    Outcome::Pass
                } else {
                    Outcome::fail_with("unmet-claims", g.unmet.join(", "))
                };
                Row::new(GATE_SUITE, "gate", &g.id, &outcome)
            })
            .collect();
        self.suites.retain(|s| s.name != GATE_SUITE);
        self.push(SuiteRows::from_rows(GATE_SUITE, rows));
        self.gate = Some(decision);
    }

    /// Suites where something was attempted and everything was skipped.
    pub fn all_skipped_suites(&self) -> Vec<&str> {
        self.suites
            .iter()
            .filter(|s| s.summary.all_skipped())
            .map(|s| s.name.as_str())
            .collect()
    }

    /// 0 without FAIL rows, else 1. `strict_skips` also fails a suite whose
    /// every subject was skipped.
    pub fn exit_code(&self, strict_skips: bool) -> i32 {
        let all_skipped = strict_skips && !self.all_skipped_suites().is_empty();
        if self.fail_rows() > 0 || all_skipped {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let summaries: BTreeMap<&str, serde_json::Value> = self
            .suites
            .iter()
            .map(|s| {
                let c = &s.summary;
                (
                    s.name.as_str(),
                    json!({"pass": c.pass, "skip": c.skip, "fail": c.fail, "measured": c.measured}),
                )
            })
            .collect();
        let gate = self.gate.as_ref().map(|g| {
            json!({
                "status": g.status,
                "gates": g.gates.iter().map(|r| json!({"id": r.id, "status": r.status, "unmet": r.unmet})).collect::<Vec<_>>(),
            })
        });
        json!({
            "all_skipped": self.all_skipped_suites(),
            "bundle_root": self.bundle_root,
            "rows": self.rows().collect::<Vec<_>>(),
            "summaries": summaries,
            "gate": gate,
        })
    }

    pub fn emit(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Machine => {
                let mut out =
                    serde_json::to_vec_pretty(&self.to_json()).expect("report serializes");
                out.push(b'\n');
                out
            }
            Format::Human => self.human().into_bytes(),
        }
    }

    fn human(&self) -> String {
        let mut out = String::new();
        for suite in &self.suites {
            out.push_str(&format!("== {} ==\n", suite.name));
            let width = suite
                .summary
                .per_unit
                .keys()
                .map(String::len)
                .max()
                .unwrap_or(0);
            for (subject, outcome) in &suite.summary.per_unit {
                out.push_str(&format!("  {subject:<width$}  {outcome}\n"));
            }
            out.push_str(&suite.summary.counts_line());
            if suite.summary.measured > 0 {
                out.push_str(&format!(" ({} measured)", suite.summary.measured));
            }
            out.push('\n');
            if suite.summary.all_skipped() {
                out.push_str("ALL SKIPPED: nothing in this suite was checked\n");
            }
        }
        out
    }
}

/// [`EvidenceReport::emit`] as a free function.
pub fn emit_report(report: &EvidenceReport, format: Format) -> Vec<u8> {
    report.emit(format)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid_json() {
        let r = EvidenceReport::new("b");
        let bytes = r.emit(Format::Machine);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["rows"], json!([]));
        assert_eq!(bytes, r.emit(Format::Machine));
        assert_eq!(r.exit_code(true), 0);
    }

    #[test]
    fn human_ends_suite_with_counts() {
        let rows = vec![
            Row::new("runtime", "C01", "U01", &Outcome::Pass),
            Row::new("runtime", "C01", "U02", &Outcome::skip("missing tools: go")),
        ];
        let mut r = EvidenceReport::new("b");
        r.push(SuiteRows::from_rows("runtime", rows));
        let text = String::from_utf8(r.emit(Format::Human)).unwrap();
        assert!(text.ends_with("1 pass, 1 skip, 0 fail\n"), "{text}");
        assert!(text.contains("U02  SKIP (missing tools: go)"));
    }

    #[test]
    fn strict_skips() {
        let mut r = EvidenceReport::new("b");
        r.push(SuiteRows::from_rows(
            "runtime",
            vec![Row::new("runtime", "C01", "U01", &Outcome::skip("x"))],
        ));
        assert_eq!(r.exit_code(false), 0);
        assert_eq!(r.exit_code(true), 1);
    }
}
