//! Source-analysis witnesses and the code-symbol traceability check.

pub mod scan;
pub mod symbols;
pub mod witness;

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::bundle::{ChainKind, TraceDecl};
use crate::outcome::Outcome;

pub use symbols::{extract_symbols, ScannerRegistry, SymbolReport, SymbolScanner, TokenScanner};
pub use witness::{
    check_profile, check_rewrite_supported, literal_absent, pattern_matches, run_rewrite_witness,
    RewriteExpectation, RewriteWitnessResult,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("unsupported language: {0}")]
    UnsupportedLanguage(String),
    #[error("source profile needs nonempty shared_intent and rewrite_markers")]
    EmptyProfile,
    #[error("unknown contract {0}")]
    UnknownContract(String),
    #[error("contract {0} is not a rewrite witness")]
    NotRewriteContract(String),
    #[error("contract {0} is missing `{1}`")]
    MissingField(String, String),
    #[error("cannot read {0}: {1}")]
    Read(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolFailure {
    pub entity: String,
    pub symbol: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodeSymbolReport {
    pub matched: usize,
    pub skipped: usize,
    pub failures: Vec<SymbolFailure>,
    /// PASS / SKIP / FAIL per symbol-bearing code entity.
    pub per_entity: BTreeMap<String, Outcome>,
}

/// Check that every code entity's declared symbol is declared in its file.
/// Entities in languages without a scanner are skipped, never matched.
pub fn check_code_symbols(
    trace: &TraceDecl,
    root: &Path,
    registry: &ScannerRegistry,
) -> CodeSymbolReport {
    let mut report = CodeSymbolReport::default();
    for e in trace.entities.iter().filter(|e| e.kind == ChainKind::Code) {
        let Some(symbol) = e.symbol.as_deref() else {
            continue;
        };
        let language = e.language.as_deref().unwrap_or_default();
        let outcome = if !registry.supports(language) {
            report.skipped += 1;
            Outcome::skip(format!(
                "unsupported language: {}",
                if language.is_empty() {
                    "none"
                } else {
                    language
                }
            ))
        } else {
            let found = match &e.path {
                None => Err("no path declared".to_string()),
                Some(rel) => std::fs::read(root.join(rel.as_str()))
                    .map_err(|err| format!("cannot read {rel}: {err}"))
                    .and_then(|src| {
                        registry
                            .extract(rel.as_str(), &src, language)
                            .map_err(|err| err.to_string())
                    })
                    .and_then(|r| {
                        if r.declared_functions.contains(symbol) {
                            Ok(())
                        } else {
                            Err(format!("{symbol} not declared in {rel}"))
                        }
                    }),
            };
            match found {
                Ok(()) => {
                    report.matched += 1;
                    Outcome::Pass
                }
                Err(reason) => {
                    report.failures.push(SymbolFailure {
                        entity: e.id.clone(),
                        symbol: symbol.to_string(),
                        reason: reason.clone(),
                    });
                    Outcome::fail_with("symbol-missing", reason)
                }
            }
        };
        report.per_entity.insert(e.id.clone(), outcome);
    }
    report
}
