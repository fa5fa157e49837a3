//! Readiness-gate evaluation over report rows.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::bundle::{EvidenceDecl, ReadinessDecl};
use crate::outcome::Status;

use super::Row;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("gate {gate} requires undeclared claim {claim}")]
pub struct UnknownClaim {
    pub gate: String,
    pub claim: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateResult {
    pub id: String,
    pub status: Status,
    /// Required claims without satisfying evidence, in declaration order.
    pub unmet: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateDecision {
    pub status: Status,
    pub gates: Vec<GateResult>,
}

/// Check names backing a claim: the union of its artifacts' `checks`.
pub fn claim_checks<'a>(evidence: &'a EvidenceDecl, claim: &str) -> BTreeSet<&'a str> {
    evidence
        .claim(claim)
        .into_iter()
        .flat_map(|c| c.evidence_refs.iter())
        .filter_map(|a| evidence.artifact(a))
        .flat_map(|a| a.checks.iter().map(String::as_str))
        .collect()
}

/// A claim holds when its rows include at least one with the required
/// status and none FAIL. SKIP rows are not evidence either way.
pub fn claim_met<'r>(
    checks: &BTreeSet<&str>,
    rows: impl IntoIterator<Item = &'r Row>,
    required: Status,
) -> bool {
    let mut seen = false;
    for row in rows
        .into_iter()
        .filter(|r| checks.contains(r.check.as_str()))
    {
        if row.status == Status::Fail {
            return false;
        }
        seen |= row.status == required;
    }
    seen
}

pub fn evaluate_gate<'r>(
    readiness: &ReadinessDecl,
    evidence: &EvidenceDecl,
    rows: impl IntoIterator<Item = &'r Row> + Clone,
) -> Result<GateDecision, UnknownClaim> {
    let mut gates = Vec::new();
    for gate in &readiness.gates {
        let mut unmet = Vec::new();
        for claim in &gate.required_claims {
            if evidence.claim(claim).is_none() {
                return Err(UnknownClaim {
                    gate: gate.id.clone(),
                    claim: claim.clone(),
                });
            }
            if !claim_met(
                &claim_checks(evidence, claim),
                rows.clone(),
                gate.required_outcome,
            ) {
                unmet.push(claim.clone());
            }
        }
        let status = if unmet.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        };
        gates.push(GateResult {
            id: gate.id.clone(),
            status,
            unmet,
        });
    }
    let status = if gates.iter().all(|g| g.status == Status::Pass) {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(GateDecision { status, gates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{ArtifactKind, Claim, EvidenceArtifact, Gate, RelPath};
    use crate::outcome::Outcome;

    fn decls() -> (ReadinessDecl, EvidenceDecl) {
        let readiness = ReadinessDecl {
            gates: vec![Gate {
                id: "G01".into(),
                name: "g".into(),
                required_claims: vec!["CL01".into()],
                required_outcome: Status::Pass,
            }],
        };
        let evidence = EvidenceDecl {
            claims: vec![Claim {
                id: "CL01".into(),
                statement: "s".into(),
                evidence_refs: vec!["E01".into()],
            }],
            artifacts: vec![EvidenceArtifact {
                id: "E01".into(),
                path: RelPath::new("run.sh").unwrap(),
                kind: ArtifactKind::Script,
                checks: vec!["C01".into()],
            }],
        };
        (readiness, evidence)
    }

    #[test]
    fn pass_fail_skip() {
        let (r, e) = decls();
        let pass = Row::new("runtime", "C01", "U01", &Outcome::Pass);
        let skip = Row::new("runtime", "C01", "U02", &Outcome::skip("x"));
        let fail = Row::new("runtime", "C01", "U03", &Outcome::fail("y"));
        assert_eq!(
            evaluate_gate(&r, &e, [&pass, &skip]).unwrap().status,
            Status::Pass
        );
        assert_eq!(evaluate_gate(&r, &e, [&skip]).unwrap().status, Status::Fail);
        let d = evaluate_gate(&r, &e, [&pass, &fail]).unwrap();
        assert_eq!(d.gates[0].unmet, ["CL01"]);
    }

    #[test]
    fn unknown_claim() {
        let (mut r, e) = decls();
        r.gates[0].required_claims.push("CL09".into());
        let err = evaluate_gate(&r, &e, std::iter::empty::<&Row>()).unwrap_err();
        assert_eq!(err.claim, "CL09");
    }
}
