//! `dagproof`: validate proof bundles, run their witnesses, and emit the
//! evidence report.
//!
//! Exit codes: 0 when no check failed (skips allowed), 1 on any FAIL or
//! validation violation, 2 on usage or configuration errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dagproof_core::bundle::{load_bundle, FsSource, CONFORMANCE};
use dagproof_core::conformance::conformance_check;
use dagproof_core::harness::{resolver_from_env, run_suite, HarnessOptions, ToolResolver};
use dagproof_core::profile::{run_rewrite_witness, ScannerRegistry};
use dagproof_core::report::{
    full_report, rewrite_contracts, rewrite_suite, runtime_suite, validate_dag, validate_readiness,
    validate_trace, EvidenceReport, Format, FullOptions, ReportError, Row, SuiteRows,
};

#[derive(Debug, Parser)]
#[command(
    name = "dagproof",
    version,
    about = "Check DAG-TOML proof bundles and run their witnesses"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Standard-output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Human, global = true)]
    format: OutputFormat,
    /// Also write the machine report to this path.
    #[arg(long, value_name = "PATH", global = true)]
    report: Option<PathBuf>,
    /// Exit 1 when every attempted subject of a suite was skipped.
    #[arg(long, global = true)]
    strict_skips: bool,
    /// Print nothing on standard output in human format.
    #[arg(long, global = true)]
    quiet: bool,
    /// Per-process timeout for builds and runs.
    #[arg(long, value_name = "SECS", default_value_t = 30, global = true)]
    timeout_secs: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Human,
    Machine,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one declaration validator.
    #[command(subcommand)]
    Validate(Validate),
    /// Run a witness.
    #[command(subcommand)]
    Witness(Witness),
    /// Run every validator and witness, then evaluate the readiness gate.
    Report {
        bundle: PathBuf,
        /// Recount each unit's physical lines against its declared LOC.
        #[arg(long)]
        strict_loc: bool,
    },
}

#[derive(Debug, Subcommand)]
enum Validate {
    /// Acyclicity and declared computed values of the implementation DAG.
    Dag {
        bundle: PathBuf,
        #[arg(long)]
        strict_loc: bool,
    },
    /// Traceability chain ordering and references.
    Trace {
        bundle: PathBuf,
        /// Also require every declared entity path to exist.
        #[arg(long)]
        check_paths_exist: bool,
    },
    /// Contract declaration, readiness gate and evidence matrix.
    Readiness { bundle: PathBuf },
    /// Structural conformance of one instance file.
    Conformance {
        file: PathBuf,
        /// Directory holding conformance_rules.toml.
        #[arg(long, value_name = "DIR")]
        spec_root: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum Witness {
    /// Build and run every runtime unit against the runtime contracts.
    Run { bundle: PathBuf },
    /// Run rewrite witnesses: one contract, or all of them.
    Rewrite {
        bundle: PathBuf,
        #[arg(long, value_name = "ID")]
        contract: Option<String>,
    },
}

fn config_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("dagproof: {message}");
    ExitCode::from(2)
}

fn resolver() -> Result<Box<dyn ToolResolver>, ExitCode> {
    resolver_from_env().map_err(config_error)
}

fn shown(path: &Path) -> String {
    path.display().to_string()
}

fn loaded(bundle: &Path) -> Result<dagproof_core::ProofBundle, ExitCode> {
    let loaded = load_bundle(bundle, &FsSource).map_err(config_error)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.bundle)
}

fn build(cli: &Cli) -> Result<EvidenceReport, ExitCode> {
    let harness = HarnessOptions {
        timeout: Duration::from_secs(cli.common.timeout_secs),
        ..Default::default()
    };
    let registry = ScannerRegistry::reference();
    let err = |e: ReportError| config_error(e);

    let report = match &cli.command {
        Command::Validate(Validate::Dag { bundle, strict_loc }) => {
            let mut r = EvidenceReport::new(shown(bundle));
            r.push(validate_dag(bundle, *strict_loc).map_err(err)?);
            r
        }
        Command::Validate(Validate::Trace {
            bundle,
            check_paths_exist,
        }) => {
            let mut r = EvidenceReport::new(shown(bundle));
            r.push(validate_trace(bundle, *check_paths_exist).map_err(err)?.0);
            r
        }
        Command::Validate(Validate::Readiness { bundle }) => {
            let mut r = EvidenceReport::new(shown(bundle));
            r.push(validate_readiness(bundle).map_err(err)?);
            r
        }
        Command::Validate(Validate::Conformance { file, spec_root }) => {
            let outcome = conformance_check(file, spec_root.as_deref()).map_err(config_error)?;
            let name = file
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| shown(file));
            let mut r = EvidenceReport::new(shown(file.parent().unwrap_or(Path::new(""))));
            r.push(SuiteRows::from_rows(
                CONFORMANCE,
                vec![Row::new(CONFORMANCE, CONFORMANCE, &name, &outcome)],
            ));
            r
        }
        Command::Witness(Witness::Run { bundle }) => {
            let resolver = resolver()?;
            let b = loaded(bundle)?;
            let run = run_suite(&b, resolver.as_ref(), &harness).map_err(config_error)?;
            let mut r = EvidenceReport::new(shown(bundle));
            r.push(runtime_suite(&run));
            r
        }
        Command::Witness(Witness::Rewrite { bundle, contract }) => {
            let resolver = resolver()?;
            let b = loaded(bundle)?;
            let ids: Vec<String> = match contract {
                Some(id) => vec![id.clone()],
                None => rewrite_contracts(&b)
                    .into_iter()
                    .map(String::from)
                    .collect(),
            };
            if ids.is_empty() {
                return Err(config_error("bundle declares no rewrite contract"));
            }
            let mut results = Vec::new();
            for id in &ids {
                results.push(
                    run_rewrite_witness(&b, id, &registry, resolver.as_ref(), &harness)
                        .map_err(config_error)?,
                );
            }
            let mut r = EvidenceReport::new(shown(bundle));
            for (id, result) in ids.iter().zip(&results) {
                r.push(rewrite_suite(id, result));
            }
            r
        }
        Command::Report { bundle, strict_loc } => {
            let resolver = resolver()?;
            let b = loaded(bundle)?;
            let options = FullOptions {
                harness,
                strict_loc: *strict_loc,
            };
            full_report(&shown(bundle), &b, resolver.as_ref(), &registry, &options).map_err(err)?
        }
    };
    Ok(report)
}

fn run(cli: Cli) -> ExitCode {
    let report = match build(&cli) {
        Ok(r) => r,
        Err(code) => return code,
    };
    if let Some(path) = &cli.common.report {
        if let Err(e) = std::fs::write(path, report.emit(Format::Machine)) {
            return config_error(format!("cannot write report {}: {e}", path.display()));
        }
    }
    let out = match cli.common.format {
        OutputFormat::Machine => Some(report.emit(Format::Machine)),
        OutputFormat::Human if cli.common.quiet => None,
        OutputFormat::Human => Some(report.emit(Format::Human)),
    };
    if let Some(bytes) = out {
        let mut stdout = std::io::stdout().lock();
        // a closed pipe is not a check failure
        let _ = stdout.write_all(&bytes).and_then(|_| stdout.flush());
    }
    ExitCode::from(report.exit_code(cli.common.strict_skips) as u8)
}

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{}", e.render());
                    ExitCode::from(2)
                }
            }
        }
    }
}
