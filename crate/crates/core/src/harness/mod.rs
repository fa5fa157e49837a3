//! Runtime witness harness: build, run, and byte-compare candidate
//! implementations against the runtime contracts.
//!
//! Each candidate gets its own temporary directory holding a `work/` tree
//! (the process working directory, `{work}` in invocations) and a
//! `capture/` tree with the stdout/stderr files. Missing toolchains are
//! SKIP; a failed build with tools present is FAIL(build-error).

pub mod checks;
pub mod exec;
pub mod resolver;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use crate::bundle::{Invocation, ProofBundle, RuntimeCheck, WitnessKind};
use crate::outcome::{Outcome, RunSummary};

pub use checks::{check_c01, check_encoding, check_no_bom, check_no_markup};
pub use exec::{execute, execute_candidate, Capture, ExecError, ExecutionRecord, DEFAULT_TIMEOUT};
pub use resolver::{
    probe_toolchain, resolver_from_env, ManifestResolver, PathResolver, ResolverError,
    ToolResolver, ToolchainProbe, TOOL_MANIFEST_ENV,
};

#[derive(Debug, Clone)]
pub struct HarnessOptions {
    pub timeout: Duration,
    /// Run candidates on separate threads.
    pub parallel: bool,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            timeout: DEFAULT_TIMEOUT,
            parallel: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SuiteError {
    #[error("no runtime contract with a byte-exact check is declared")]
    NoRuntimeContract,
}

/// The runtime contracts of a bundle: the byte-exact expectation plus every
/// runtime check in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeContracts {
    pub expected: Vec<u8>,
    pub checks: Vec<(String, RuntimeCheck)>,
}

impl RuntimeContracts {
    pub fn from_bundle(bundle: &ProofBundle) -> Result<Self, SuiteError> {
        let primary = bundle
            .contracts
            .byte_exact()
            .ok_or(SuiteError::NoRuntimeContract)?;
        let expected = primary
            .expected_stdout
            .as_ref()
            .ok_or(SuiteError::NoRuntimeContract)?
            .0
            .clone();
        let checks = bundle
            .contracts
            .contracts
            .iter()
            .filter(|c| c.witness == WitnessKind::RuntimeSuite)
            .filter_map(|c| c.check.map(|k| (c.id.clone(), k)))
            .collect();
        Ok(RuntimeContracts { expected, checks })
    }

    /// Only the byte-exact contract, under the given id.
    pub fn byte_exact_only(id: &str, expected: &[u8]) -> Self {
        RuntimeContracts {
            expected: expected.to_vec(),
            checks: vec![(id.to_string(), RuntimeCheck::ByteExact)],
        }
    }

    fn evaluate(&self, record: &ExecutionRecord) -> Vec<(String, Outcome)> {
        let stdout = record.stdout_bytes().unwrap_or_default();
        self.checks
            .iter()
            .map(|(id, check)| {
                let outcome = match check {
                    RuntimeCheck::ByteExact => check_c01(record, &self.expected),
                    RuntimeCheck::Ascii => check_encoding(&stdout),
                    RuntimeCheck::NoMarkup => check_no_markup(&stdout, self.expected.len()),
                    RuntimeCheck::NoBom => match self.expected.first() {
                        Some(&first) => check_no_bom(&stdout, first),
                        None => Outcome::fail("empty: expected output is empty"),
                    },
                };
                (id.clone(), outcome)
            })
            .collect()
    }

    fn all(&self, outcome: &Outcome) -> Vec<(String, Outcome)> {
        self.checks
            .iter()
            .map(|(id, _)| (id.clone(), outcome.clone()))
            .collect()
    }
}

/// Outcome of one candidate: per-contract rows and the folded unit outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateResult {
    pub unit: String,
    pub contracts: Vec<(String, Outcome)>,
    pub outcome: Outcome,
}

fn fold(contracts: &[(String, Outcome)]) -> Outcome {
    if let Some((_, skip)) = contracts.iter().find(|(_, o)| o.is_skip()) {
        return skip.clone();
    }
    contracts
        .iter()
        .find(|(_, o)| o.is_fail())
        .map(|(_, o)| o.clone())
        .unwrap_or(Outcome::Pass)
}

fn expand(arg: &str, root: &Path, work: &Path) -> String {
    arg.replace("{root}", &root.to_string_lossy())
        .replace("{work}", &work.to_string_lossy())
}

/// Expand placeholders and resolve a bare program name through the resolver.
fn command_line(
    argv: &[String],
    root: &Path,
    work: &Path,
    resolver: &dyn ToolResolver,
) -> Result<Vec<OsString>, Outcome> {
    let Some((program, args)) = argv.split_first() else {
        return Err(Outcome::fail("spawn-error: empty command"));
    };
    let expanded = expand(program, root, work);
    let program: PathBuf = if expanded.contains('/') {
        PathBuf::from(expanded)
    } else {
        resolver.resolve(&expanded).ok_or_else(|| {
            Outcome::fail_with("spawn-error", format!("tool `{expanded}` is not available"))
        })?
    };
    let mut line = vec![program.into_os_string()];
    line.extend(args.iter().map(|a| OsString::from(expand(a, root, work))));
    Ok(line)
}

/// Probe, build, run, and evaluate one candidate.
pub fn run_candidate(
    unit: &str,
    invocation: &Invocation,
    root: &Path,
    contracts: &RuntimeContracts,
    resolver: &dyn ToolResolver,
    options: &HarnessOptions,
) -> CandidateResult {
    let finish = |rows: Vec<(String, Outcome)>| CandidateResult {
        unit: unit.to_string(),
        outcome: fold(&rows),
        contracts: rows,
    };

    let probe = probe_toolchain(unit, &invocation.requires, resolver);
    if !probe.available {
        return finish(contracts.all(&Outcome::skip(probe.skip_reason())));
    }

    let failed = |o: Outcome| finish(contracts.all(&o));
    let scratch = match tempfile::Builder::new().prefix("dagproof-").tempdir() {
        Ok(dir) => dir,
        Err(e) => {
            return failed(Outcome::fail_with(
                "spawn-error",
                format!("cannot create work directory: {e}"),
            ))
        }
    };
    let work = scratch.path().join("work");
    let capture_dir = scratch.path().join("capture");
    if let Err(e) = std::fs::create_dir(&work).and_then(|_| std::fs::create_dir(&capture_dir)) {
        return failed(Outcome::fail_with(
            "spawn-error",
            format!("cannot create work directory: {e}"),
        ));
    }
    let root = std::fs::canonicalize(root).unwrap_or_else(|_| root.to_path_buf());

    for (step, argv) in invocation.build.iter().enumerate() {
        let line = match command_line(argv, &root, &work, resolver) {
            Ok(line) => line,
            Err(o) => return failed(o),
        };
        let stem = format!("build-{}", step + 1);
        let capture = Capture {
            unit,
            capture_dir: &capture_dir,
            stem: &stem,
            timeout: options.timeout,
        };
        let tool = argv.first().map(String::as_str).unwrap_or("");
        match execute(&line, &work, &capture) {
            Ok(rec) if rec.timed_out => {
                return failed(Outcome::fail_with(
                    "timeout",
                    format!("build step {} ({tool})", step + 1),
                ))
            }
            Ok(rec) if rec.exit_code != 0 => {
                return failed(Outcome::fail_with(
                    "build-error",
                    format!("step {} ({tool}) exited with {}", step + 1, rec.exit_code),
                ))
            }
            Ok(_) => {}
            Err(e) => {
                return failed(Outcome::fail_with(
                    "build-error",
                    format!("step {} ({tool}): {e}", step + 1),
                ))
            }
        }
    }

    let line = match command_line(&invocation.run, &root, &work, resolver) {
        Ok(line) => line,
        Err(o) => return failed(o),
    };
    let capture = Capture {
        unit,
        capture_dir: &capture_dir,
        stem: "run",
        timeout: options.timeout,
    };
    match execute(&line, &work, &capture) {
        Ok(record) => finish(contracts.evaluate(&record)),
        Err(e) => failed(Outcome::fail_with("spawn-error", e)),
    }
}

/// C01 alone for a single invocation. Used by the rewrite witnesses.
pub fn runtime_c01(
    label: &str,
    invocation: &Invocation,
    root: &Path,
    expected: &[u8],
    resolver: &dyn ToolResolver,
    options: &HarnessOptions,
) -> Outcome {
    let contracts = RuntimeContracts::byte_exact_only("C01", expected);
    run_candidate(label, invocation, root, &contracts, resolver, options).outcome
}

/// Per-contract row of a runtime run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractRow {
    pub contract: String,
    pub unit: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeRun {
    /// One entry per runtime unit.
    pub summary: RunSummary,
    /// Unit-major, contracts in declaration order.
    pub rows: Vec<ContractRow>,
}

impl RuntimeRun {
    /// Exit status under the fail-only rule; `strict_skips` also rejects a
    /// run where every unit was skipped.
    pub fn exit_status(&self, strict_skips: bool) -> i32 {
        if self.summary.fail > 0 || (strict_skips && self.summary.all_skipped()) {
            1
        } else {
            0
        }
    }
}

/// Run every unit that declares a `run` command.
pub fn run_suite(
    bundle: &ProofBundle,
    resolver: &dyn ToolResolver,
    options: &HarnessOptions,
) -> Result<RuntimeRun, SuiteError> {
    let contracts = RuntimeContracts::from_bundle(bundle)?;
    let candidates: Vec<(&str, Invocation)> = bundle
        .dag
        .units
        .iter()
        .filter_map(|u| u.invocation().map(|inv| (u.id.as_str(), inv)))
        .collect();

    let run_one = |(unit, inv): &(&str, Invocation)| {
        run_candidate(unit, inv, &bundle.root, &contracts, resolver, options)
    };
    let mut results: Vec<CandidateResult> = if options.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = candidates
                .iter()
                .map(|c| scope.spawn(move || run_one(c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("candidate thread panicked"))
                .collect()
        })
    } else {
        candidates.iter().map(run_one).collect()
    };
    results.sort_by(|a, b| a.unit.cmp(&b.unit));

    let mut summary = RunSummary::default();
    let mut rows = Vec::new();
    for result in results {
        for (contract, outcome) in result.contracts {
            rows.push(ContractRow {
                contract,
                unit: result.unit.clone(),
                outcome,
            });
        }
        summary.record(result.unit, result.outcome);
    }
    Ok(RuntimeRun { summary, rows })
}
