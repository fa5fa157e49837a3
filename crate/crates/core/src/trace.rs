//! Traceability chain validation.
//!
//! Chain rule: every reference points exactly one rank back
//! (intent <- requirement <- implementation <- code <- test <- output), and
//! every non-intent entity references at least one entity of the preceding
//! kind.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::bundle::{ChainKind, Entity, RelPath, TraceDecl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// The referenced id is not declared.
    Unresolved,
    /// The reference skips ranks or points forward.
    RankViolation,
    /// A non-intent entity has no reference to the preceding kind.
    MissingPredecessor,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Dangling {
    pub entity: String,
    /// Offending reference; `None` for a missing predecessor.
    pub reference: Option<String>,
    pub kind: ViolationKind,
}

impl fmt::Display for Dangling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, &self.reference) {
            (ViolationKind::Unresolved, Some(r)) => {
                write!(f, "{} references unknown id {r}", self.entity)
            }
            (ViolationKind::RankViolation, Some(r)) => {
                write!(
                    f,
                    "{} references {r}, which is not one rank earlier",
                    self.entity
                )
            }
            _ => write!(
                f,
                "{} references no entity of the preceding kind",
                self.entity
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MissingPath {
    pub entity: String,
    pub path: RelPath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceReport {
    pub entity_count: usize,
    pub kind_counts: BTreeMap<ChainKind, usize>,
    pub dangling: Vec<Dangling>,
    pub missing_paths: Vec<MissingPath>,
    /// Entity ids in sorted order, for per-entity reporting.
    pub entities: Vec<String>,
}

impl TraceReport {
    pub fn passed(&self) -> bool {
        self.dangling.is_empty() && self.missing_paths.is_empty()
    }

    /// Problems attached to one entity, as display strings.
    pub fn problems_of(&self, entity: &str) -> Vec<String> {
        let mut out: Vec<String> = self
            .dangling
            .iter()
            .filter(|d| d.entity == entity)
            .map(|d| d.to_string())
            .collect();
        out.extend(
            self.missing_paths
                .iter()
                .filter(|m| m.entity == entity)
                .map(|m| format!("missing path {}", m.path)),
        );
        out
    }
}

/// Reference integrity and chain ordering, without touching the filesystem.
pub fn validate_chain(trace: &TraceDecl) -> TraceReport {
    let by_id: HashMap<&str, &Entity> = trace.entities.iter().map(|e| (e.id.as_str(), e)).collect();

    let mut kind_counts: BTreeMap<ChainKind, usize> =
        ChainKind::ALL.iter().map(|k| (*k, 0)).collect();
    let mut dangling = Vec::new();
    for entity in &trace.entities {
        *kind_counts.entry(entity.kind).or_insert(0) += 1;
        let mut has_predecessor = false;
        for r in &entity.refs {
            match by_id.get(r.as_str()) {
                None => dangling.push(Dangling {
                    entity: entity.id.clone(),
                    reference: Some(r.clone()),
                    kind: ViolationKind::Unresolved,
                }),
                Some(target) if Some(target.kind) == entity.kind.predecessor() => {
                    has_predecessor = true
                }
                Some(_) => dangling.push(Dangling {
                    entity: entity.id.clone(),
                    reference: Some(r.clone()),
                    kind: ViolationKind::RankViolation,
                }),
            }
        }
        if entity.kind != ChainKind::Intent && !has_predecessor {
            dangling.push(Dangling {
                entity: entity.id.clone(),
                reference: None,
                kind: ViolationKind::MissingPredecessor,
            });
        }
    }
    dangling.sort();

    let mut entities: Vec<String> = trace.entities.iter().map(|e| e.id.clone()).collect();
    entities.sort();
    TraceReport {
        entity_count: trace.entities.len(),
        kind_counts,
        dangling,
        missing_paths: Vec::new(),
        entities,
    }
}

/// [`validate_chain`] plus a probe of every declared entity path.
pub fn check_paths_exist(trace: &TraceDecl, root: &Path) -> TraceReport {
    let mut report = validate_chain(trace);
    report.missing_paths = trace
        .entities
        .iter()
        .filter_map(|e| e.path.as_ref().map(|p| (e, p)))
        .filter(|(_, p)| !root.join(p.as_str()).exists())
        .map(|(e, p)| MissingPath {
            entity: e.id.clone(),
            path: p.clone(),
        })
        .collect();
    report.missing_paths.sort();
    report
}
