//! Suite builders: each turns one validator or witness run into rows.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bundle::{
    contract_errors, evidence_errors, load_declaration, readiness_errors, BundleError,
    BundleErrors, ContractDecl, DagDecl, EvidenceDecl, ProofBundle, ReadinessDecl, TraceDecl,
    WitnessKind, CODE_SYMBOLS, CONTRACT_FILE, DAG_FILE, EVIDENCE_FILE, READINESS_FILE, TRACE_FILE,
    VALIDATE_DAG, VALIDATE_READINESS, VALIDATE_TRACE,
};
use crate::dag::{self, DagError};
use crate::harness::{run_suite, HarnessOptions, RuntimeRun, SuiteError, ToolResolver};
use crate::outcome::Outcome;
use crate::profile::{
    check_code_symbols, run_rewrite_witness, ProfileError, RewriteWitnessResult, ScannerRegistry,
};
use crate::trace::{check_paths_exist, validate_chain, TraceReport};

use super::{evaluate_gate, EvidenceReport, Row, SuiteRows, UnknownClaim};

pub const RUNTIME_SUITE: &str = "runtime";
/// Subject of the MEASURED entity-count row in the trace suite.
pub const ENTITY_COUNT: &str = "entity-count";

/// Errors that stop a command before any suite runs.
#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0} is not a readable directory")]
    RootUnreadable(PathBuf),
    #[error("{0}")]
    Bundle(#[from] BundleErrors),
    #[error("{0}")]
    Suite(#[from] SuiteError),
    #[error("{0}")]
    Profile(#[from] ProfileError),
    #[error("{0}")]
    Gate(#[from] UnknownClaim),
}

fn require_root(root: &Path) -> Result<(), ReportError> {
    if root.is_dir() {
        Ok(())
    } else {
        Err(ReportError::RootUnreadable(root.to_path_buf()))
    }
}

fn join_errors(errors: &[BundleError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// One FAIL row standing for a declaration that did not load.
fn load_failure(suite: &str, file: &str, errors: &BundleErrors) -> Row {
    let clause = if errors
        .0
        .iter()
        .all(|e| matches!(e, BundleError::MissingFile(_)))
    {
        "missing-file"
    } else {
        "parse-error"
    };
    Row::new(
        suite,
        suite,
        file,
        &Outcome::fail_with(clause, join_errors(&errors.0)),
    )
}

/// Acyclicity, then one row per computed field. Without a declared
/// `[computed]` table the fields are MEASURED. `strict_loc` adds one row
/// per unit comparing declared LOC with physical lines.
pub fn dag_suite(dag: &DagDecl, root: &Path, strict_loc: bool) -> SuiteRows {
    let row = |subject: &str, o: &Outcome| Row::new(VALIDATE_DAG, VALIDATE_DAG, subject, o);
    let mut rows = Vec::new();
    match dag::compute_values(dag) {
        Err(e @ DagError::Cycle(_)) => rows.push(row("acyclic", &Outcome::fail_with("cycle", e))),
        Err(e) => rows.push(row(
            "references",
            &Outcome::fail_with("unknown-dependency", e),
        )),
        Ok(computed) => {
            rows.push(row("acyclic", &Outcome::Pass));
            let as_measured = |d: dag::ReconcileDiff| Outcome::Measured { note: d.computed };
            match &dag.declared_computed {
                Some(declared) => {
                    let diffs = dag::compare_values(declared, &computed);
                    for field in dag::COMPUTED_FIELDS {
                        let o = match diffs.iter().find(|d| d.field == field) {
                            Some(d) => Outcome::fail_with(
                                "mismatch",
                                format!("declared {}, computed {}", d.declared, d.computed),
                            ),
                            None => Outcome::Pass,
                        };
                        rows.push(row(field, &o));
                    }
                }
                None => {
                    // compare against an empty declaration to get display strings
                    let shown = dag::compare_values(&Default::default(), &computed);
                    for field in dag::COMPUTED_FIELDS {
                        let o = shown
                            .iter()
                            .find(|d| d.field == field)
                            .cloned()
                            .map(as_measured)
                            .unwrap_or(Outcome::Measured {
                                note: "empty".into(),
                            });
                        rows.push(row(field, &o));
                    }
                }
            }
        }
    }
    if strict_loc {
        let diffs = dag::recount_loc(dag, root);
        for unit in &dag.units {
            let o = match diffs.iter().find(|d| d.unit == unit.id) {
                None => Outcome::Pass,
                Some(d) => match d.counted {
                    Some(n) => Outcome::fail_with(
                        "loc-mismatch",
                        format!("declared {}, counted {n}", d.declared),
                    ),
                    None => Outcome::fail_with("loc-unreadable", "a source path could not be read"),
                },
            };
            rows.push(row(&format!("loc:{}", unit.id), &o));
        }
    }
    SuiteRows::from_rows(VALIDATE_DAG, rows)
}

/// Load only the DAG file and validate it.
pub fn validate_dag(root: &Path, strict_loc: bool) -> Result<SuiteRows, ReportError> {
    require_root(root)?;
    Ok(match load_declaration::<DagDecl>(root) {
        Ok((dag, _)) => dag_suite(&dag, root, strict_loc),
        Err(e) => {
            SuiteRows::from_rows(VALIDATE_DAG, vec![load_failure(VALIDATE_DAG, DAG_FILE, &e)])
        }
    })
}

/// One row per entity, failing with every chain or path problem found.
pub fn trace_suite(trace: &TraceDecl, root: &Path, check_paths: bool) -> (SuiteRows, TraceReport) {
    let report = if check_paths {
        check_paths_exist(trace, root)
    } else {
        validate_chain(trace)
    };
    let rows: Vec<Row> = report
        .entities
        .iter()
        .map(|id| {
            let problems = report.problems_of(id);
            let o = if problems.is_empty() {
                Outcome::Pass
            } else {
                let chain_problem = report.dangling.iter().any(|d| &d.entity == id);
                let clause = if chain_problem {
                    "chain-violation"
                } else {
                    "missing-path"
                };
                Outcome::fail_with(clause, problems.join("; "))
            };
            Row::new(VALIDATE_TRACE, VALIDATE_TRACE, id, &o)
        })
        .chain(std::iter::once(Row::new(
            VALIDATE_TRACE,
            VALIDATE_TRACE,
            ENTITY_COUNT,
            &Outcome::Measured {
                note: report.entity_count.to_string(),
            },
        )))
        .collect();
    (SuiteRows::from_rows(VALIDATE_TRACE, rows), report)
}

/// Load only the traceability file and validate it.
pub fn validate_trace(
    root: &Path,
    check_paths: bool,
) -> Result<(SuiteRows, Option<TraceReport>), ReportError> {
    require_root(root)?;
    Ok(match load_declaration::<TraceDecl>(root) {
        Ok((trace, _)) => {
            let (suite, report) = trace_suite(&trace, root, check_paths);
            (suite, Some(report))
        }
        Err(e) => (
            SuiteRows::from_rows(
                VALIDATE_TRACE,
                vec![load_failure(VALIDATE_TRACE, TRACE_FILE, &e)],
            ),
            None,
        ),
    })
}

/// One row per file among the contract declaration, readiness gate and
/// evidence matrix, including their cross-references and artifact paths.
pub fn readiness_suite(
    root: &Path,
    contracts: &ContractDecl,
    readiness: &ReadinessDecl,
    evidence: &EvidenceDecl,
) -> SuiteRows {
    let row = |file: &str, errors: Vec<String>| {
        let o = if errors.is_empty() {
            Outcome::Pass
        } else {
            Outcome::fail_with("invalid", errors.join("; "))
        };
        Row::new(VALIDATE_READINESS, VALIDATE_READINESS, file, &o)
    };
    let strings =
        |errors: Vec<BundleError>| errors.iter().map(ToString::to_string).collect::<Vec<_>>();

    let mut evidence_problems = strings(evidence_errors(evidence, contracts));
    for a in &evidence.artifacts {
        if !root.join(a.path.as_str()).exists() {
            evidence_problems.push(format!("artifact {} path {} does not exist", a.id, a.path));
        }
    }
    let rows = vec![
        row(CONTRACT_FILE, strings(contract_errors(contracts))),
        row(
            READINESS_FILE,
            strings(readiness_errors(readiness, evidence)),
        ),
        row(EVIDENCE_FILE, evidence_problems),
    ];
    SuiteRows::from_rows(VALIDATE_READINESS, rows)
}

/// Load the three readiness-related files and validate them together.
pub fn validate_readiness(root: &Path) -> Result<SuiteRows, ReportError> {
    require_root(root)?;
    let contracts = load_declaration::<ContractDecl>(root);
    let readiness = load_declaration::<ReadinessDecl>(root);
    let evidence = load_declaration::<EvidenceDecl>(root);
    Ok(match (contracts, readiness, evidence) {
        (Ok((c, _)), Ok((r, _)), Ok((e, _))) => readiness_suite(root, &c, &r, &e),
        (c, r, e) => {
            let mut rows = Vec::new();
            let mut add = |file: &str, err: Option<BundleErrors>| {
                rows.push(match err {
                    None => Row::new(VALIDATE_READINESS, VALIDATE_READINESS, file, &Outcome::Pass),
                    Some(errs) => load_failure(VALIDATE_READINESS, file, &errs),
                });
            };
            add(CONTRACT_FILE, c.err());
            add(READINESS_FILE, r.err());
            add(EVIDENCE_FILE, e.err());
            SuiteRows::from_rows(VALIDATE_READINESS, rows)
        }
    })
}

pub fn code_symbol_suite(trace: &TraceDecl, root: &Path, registry: &ScannerRegistry) -> SuiteRows {
    let report = check_code_symbols(trace, root, registry);
    let rows = report
        .per_entity
        .iter()
        .map(|(id, o)| Row::new(CODE_SYMBOLS, CODE_SYMBOLS, id, o))
        .collect();
    SuiteRows::from_rows(CODE_SYMBOLS, rows)
}

/// Rows per unit x contract; the summary counts units.
pub fn runtime_suite(run: &RuntimeRun) -> SuiteRows {
    let rows = run
        .rows
        .iter()
        .map(|r| Row::new(RUNTIME_SUITE, &r.contract, &r.unit, &r.outcome))
        .collect();
    SuiteRows {
        name: RUNTIME_SUITE.to_string(),
        rows,
        summary: run.summary.clone(),
    }
}

pub fn rewrite_suite_name(contract: &str) -> String {
    format!("rewrite:{contract}")
}

/// Rows keyed by check name under the contract id.
pub fn rewrite_suite(contract: &str, result: &RewriteWitnessResult) -> SuiteRows {
    let name = rewrite_suite_name(contract);
    let rows = result
        .checks
        .iter()
        .map(|(check, o)| Row::new(&name, contract, check, o))
        .collect();
    SuiteRows {
        name,
        rows,
        summary: result.summary.clone(),
    }
}

/// Every contract whose witness is a rewrite check, in declaration order.
pub fn rewrite_contracts(bundle: &ProofBundle) -> Vec<&str> {
    bundle
        .contracts
        .contracts
        .iter()
        .filter(|c| {
            matches!(
                c.witness,
                WitnessKind::SymbolRewrite | WitnessKind::SourceProfile
            )
        })
        .map(|c| c.id.as_str())
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct FullOptions {
    pub harness: HarnessOptions,
    pub strict_loc: bool,
}

/// Every validator and witness over a loaded bundle, then the gate.
/// Witness-level errors become FAIL rows so the report stays complete.
pub fn full_report(
    bundle_root: &str,
    bundle: &ProofBundle,
    resolver: &dyn ToolResolver,
    registry: &ScannerRegistry,
    options: &FullOptions,
) -> Result<EvidenceReport, ReportError> {
    let root = bundle.root.as_path();
    let rewrites = rewrite_contracts(bundle);

    let (runtime, rewrite_results) = std::thread::scope(|scope| {
        let runtime = scope.spawn(|| run_suite(bundle, resolver, &options.harness));
        let handles: Vec<_> = rewrites
            .iter()
            .map(|id| {
                scope.spawn(move || {
                    run_rewrite_witness(bundle, id, registry, resolver, &options.harness)
                })
            })
            .collect();
        let results: Vec<_> = handles
            .into_iter()
            .map(|h| h.join().expect("witness thread panicked"))
            .collect();
        (runtime.join().expect("runtime thread panicked"), results)
    });

    let mut report = EvidenceReport::new(bundle_root);
    report.push(dag_suite(&bundle.dag, root, options.strict_loc));
    report.push(trace_suite(&bundle.trace, root, true).0);
    report.push(readiness_suite(
        root,
        &bundle.contracts,
        &bundle.readiness,
        &bundle.evidence,
    ));
    report.push(code_symbol_suite(&bundle.trace, root, registry));
    report.push(match runtime {
        Ok(run) => runtime_suite(&run),
        Err(e) => SuiteRows::from_rows(
            RUNTIME_SUITE,
            vec![Row::new(
                RUNTIME_SUITE,
                RUNTIME_SUITE,
                "suite",
                &Outcome::fail_with("no-runtime-contract", e),
            )],
        ),
    });
    for (id, result) in rewrites.iter().zip(rewrite_results) {
        report.push(match result {
            Ok(r) => rewrite_suite(id, &r),
            Err(e) => {
                let name = rewrite_suite_name(id);
                SuiteRows::from_rows(
                    &name,
                    vec![Row::new(
                        &name,
                        id,
                        "witness",
                        &Outcome::fail_with("witness-error", e),
                    )],
                )
            }
        });
    }
    let rows: Vec<&Row> = report.rows().collect();
    let decision = evaluate_gate(&bundle.readiness, &bundle.evidence, rows.iter().copied())?;
    report.set_gate(decision);
    Ok(report)
}
