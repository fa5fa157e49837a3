//! Proof bundle model: the five declaration files, parsed and cross-checked.
//!
//! The TOML schema (tables `[[contract]]`, `[[unit]]`, `[computed]`,
//! `[[entity]]`, `[[gate]]`, `[[claim]]`, `[[artifact]]`) is documented in
//! the repository README. Unknown keys produce warnings, not errors.

pub mod decl;
pub mod escape;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use decl::*;
pub use escape::ExpectedOutput;

pub const CONTRACT_FILE: &str = "contract_declaration.toml";
pub const DAG_FILE: &str = "implementation_dag.toml";
pub const TRACE_FILE: &str = "traceability.toml";
pub const READINESS_FILE: &str = "review_readiness.toml";
pub const EVIDENCE_FILE: &str = "evidence_matrix.toml";

pub const DECLARATION_FILES: [&str; 5] = [
    CONTRACT_FILE,
    DAG_FILE,
    TRACE_FILE,
    READINESS_FILE,
    EVIDENCE_FILE,
];

pub const VALIDATE_DAG: &str = "validate-dag";
pub const VALIDATE_TRACE: &str = "validate-trace";
pub const VALIDATE_READINESS: &str = "validate-readiness";
pub const CODE_SYMBOLS: &str = "code-symbols";
pub const CONFORMANCE: &str = "conformance";

/// Validator names an evidence artifact may cite besides contract ids.
pub const VALIDATOR_NAMES: [&str; 5] = [
    VALIDATE_DAG,
    VALIDATE_TRACE,
    VALIDATE_READINESS,
    CODE_SYMBOLS,
    CONFORMANCE,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("{0} is not a readable directory")]
    RootUnreadable(PathBuf),
    #[error("missing declaration file {0}")]
    MissingFile(String),
    #[error("cannot read {file}: {message}")]
    Io { file: String, message: String },
    #[error("{file}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        file: String,
        line: Option<usize>,
        message: String,
    },
    #[error("{file}: dangling reference `{id}` ({context})")]
    DanglingRef {
        file: String,
        id: String,
        context: String,
    },
}

/// Every problem found while loading, in discovery order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleErrors(pub Vec<BundleError>);

impl fmt::Display for BundleErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for BundleErrors {}

impl From<BundleError> for BundleErrors {
    fn from(e: BundleError) -> Self {
        BundleErrors(vec![e])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub file: String,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.file, self.message)
    }
}

/// Where declaration bytes come from. Tests swap in a recording source.
pub trait FileSource {
    fn read(&self, path: &Path) -> io::Result<Vec<u8>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FsSource;

impl FileSource for FsSource {
    fn read(&self, path: &Path) -> io::Result<Vec<u8>> {
        std::fs::read(path)
    }
}

/// One of the five declaration files.
pub trait Declaration: Sized + DeserializeOwned + Serialize {
    const FILE: &'static str;

    /// Single-file invariants (uniqueness, required fields).
    fn problems(&self, text: &str) -> Vec<BundleError>;

    /// Parse one file, collecting warnings for unknown keys.
    fn parse(text: &str) -> Result<(Self, Vec<Warning>), BundleErrors> {
        let mut warnings = Vec::new();
        let de = toml::Deserializer::parse(text).map_err(|e| toml_error(Self::FILE, text, &e))?;
        let value: Self = serde_ignored::deserialize(de, |path| {
            warnings.push(Warning {
                file: Self::FILE.to_string(),
                message: format!("unknown key `{path}` ignored"),
            })
        })
        .map_err(|e| toml_error(Self::FILE, text, &e))?;
        let problems = value.problems(text);
        if problems.is_empty() {
            Ok((value, warnings))
        } else {
            Err(BundleErrors(problems))
        }
    }

    fn to_toml(&self) -> String {
        toml::to_string(self).expect("declaration types always serialize")
    }
}

fn toml_error(file: &str, text: &str, e: &toml::de::Error) -> BundleError {
    BundleError::Parse {
        file: file.to_string(),
        line: e.span().map(|span| line_of_offset(text, span.start)),
        message: e.message().to_string(),
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

/// Line of the `nth` (0-based) `id = "<id>"` assignment in `text`.
fn line_of_id(text: &str, id: &str, nth: usize) -> Option<usize> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| {
            let Some(rest) = line.trim_start().strip_prefix("id") else {
                return false;
            };
            let Some(value) = rest.trim_start().strip_prefix('=') else {
                return false;
            };
            let value = value.split('#').next().unwrap_or("").trim();
            value.len() >= 2 && value.trim_matches(|c| c == '"' || c == '\'') == id
        })
        .nth(nth)
        .map(|(i, _)| i + 1)
}

fn duplicate_ids<'a>(
    file: &str,
    text: &str,
    what: &str,
    ids: impl Iterator<Item = &'a str>,
) -> Vec<BundleError> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut errors = Vec::new();
    for id in ids {
        let count = seen.entry(id).or_insert(0);
        *count += 1;
        if *count == 2 {
            errors.push(BundleError::Parse {
                file: file.to_string(),
                line: line_of_id(text, id, 1),
                message: format!("duplicate {what} id `{id}`"),
            });
        }
    }
    errors
}

fn problem_at(file: &str, text: &str, id: &str, message: String) -> BundleError {
    BundleError::Parse {
        file: file.to_string(),
        line: line_of_id(text, id, 0),
        message,
    }
}

impl Declaration for ContractDecl {
    const FILE: &'static str = CONTRACT_FILE;

    fn problems(&self, text: &str) -> Vec<BundleError> {
        let mut errors = duplicate_ids(
            Self::FILE,
            text,
            "contract",
            self.contracts.iter().map(|c| c.id.as_str()),
        );
        for c in &self.contracts {
            for message in c.shape_problems() {
                errors.push(problem_at(Self::FILE, text, &c.id, message));
            }
        }
        errors
    }
}

impl Declaration for DagDecl {
    const FILE: &'static str = DAG_FILE;

    fn problems(&self, text: &str) -> Vec<BundleError> {
        let mut errors = duplicate_ids(
            Self::FILE,
            text,
            "unit",
            self.units.iter().map(|u| u.id.as_str()),
        );
        for u in &self.units {
            if matches!(&u.run, Some(run) if run.is_empty()) {
                errors.push(problem_at(
                    Self::FILE,
                    text,
                    &u.id,
                    format!("unit {} has an empty `run` command", u.id),
                ));
            }
        }
        errors
    }
}

impl Declaration for TraceDecl {
    const FILE: &'static str = TRACE_FILE;

    fn problems(&self, text: &str) -> Vec<BundleError> {
        duplicate_ids(
            Self::FILE,
            text,
            "entity",
            self.entities.iter().map(|e| e.id.as_str()),
        )
    }
}

impl Declaration for ReadinessDecl {
    const FILE: &'static str = READINESS_FILE;

    fn problems(&self, text: &str) -> Vec<BundleError> {
        let mut errors = duplicate_ids(
            Self::FILE,
            text,
            "gate",
            self.gates.iter().map(|g| g.id.as_str()),
        );
        for g in &self.gates {
            if g.required_outcome != crate::Status::Pass {
                errors.push(problem_at(
                    Self::FILE,
                    text,
                    &g.id,
                    format!(
                        "gate {} must require PASS, not {}",
                        g.id, g.required_outcome
                    ),
                ));
            }
        }
        errors
    }
}

impl Declaration for EvidenceDecl {
    const FILE: &'static str = EVIDENCE_FILE;

    fn problems(&self, text: &str) -> Vec<BundleError> {
        let mut errors = duplicate_ids(
            Self::FILE,
            text,
            "claim",
            self.claims.iter().map(|c| c.id.as_str()),
        );
        errors.extend(duplicate_ids(
            Self::FILE,
            text,
            "artifact",
            self.artifacts.iter().map(|a| a.id.as_str()),
        ));
        for c in &self.claims {
            if c.evidence_refs.is_empty() {
                errors.push(problem_at(
                    Self::FILE,
                    text,
                    &c.id,
                    format!("claim {} has no evidence_refs", c.id),
                ));
            }
        }
        errors
    }
}

/// The five declarations of one bundle. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofBundle {
    pub root: PathBuf,
    pub contracts: ContractDecl,
    pub dag: DagDecl,
    pub trace: TraceDecl,
    pub readiness: ReadinessDecl,
    pub evidence: EvidenceDecl,
}

/// A parsed bundle plus the non-fatal warnings found on the way.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub bundle: ProofBundle,
    pub warnings: Vec<Warning>,
}

pub fn parse_bundle(root: impl AsRef<Path>) -> Result<ProofBundle, BundleErrors> {
    load_bundle(root.as_ref(), &FsSource).map(|loaded| loaded.bundle)
}

/// Read a single declaration file from a bundle root.
pub fn load_declaration<D: Declaration>(root: &Path) -> Result<(D, Vec<Warning>), BundleErrors> {
    let text = read_declaration(root, D::FILE, &FsSource)?;
    D::parse(&text)
}

fn read_declaration(
    root: &Path,
    file: &str,
    source: &dyn FileSource,
) -> Result<String, BundleError> {
    match source.read(&root.join(file)) {
        Ok(bytes) => String::from_utf8(bytes).map_err(|e| BundleError::Parse {
            file: file.to_string(),
            line: None,
            message: format!("not valid UTF-8: {e}"),
        }),
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            Err(BundleError::MissingFile(file.to_string()))
        }
        Err(e) => Err(BundleError::Io {
            file: file.to_string(),
            message: e.to_string(),
        }),
    }
}

/// Load and cross-check every declaration. Either a fully resolved bundle
/// or the complete error list; never a partial bundle.
pub fn load_bundle(root: &Path, source: &dyn FileSource) -> Result<Loaded, BundleErrors> {
    if !root.is_dir() {
        return Err(BundleError::RootUnreadable(root.to_path_buf()).into());
    }

    let mut errors = Vec::new();
    let mut texts = BTreeMap::new();
    for file in DECLARATION_FILES {
        match read_declaration(root, file, source) {
            Ok(text) => {
                texts.insert(file, text);
            }
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(BundleErrors(errors));
    }

    let mut warnings = Vec::new();
    fn take<D: Declaration>(
        texts: &BTreeMap<&str, String>,
        errors: &mut Vec<BundleError>,
        warnings: &mut Vec<Warning>,
    ) -> Option<D> {
        match D::parse(&texts[D::FILE]) {
            Ok((decl, w)) => {
                warnings.extend(w);
                Some(decl)
            }
            Err(BundleErrors(e)) => {
                errors.extend(e);
                None
            }
        }
    }
    let contracts = take::<ContractDecl>(&texts, &mut errors, &mut warnings);
    let dag = take::<DagDecl>(&texts, &mut errors, &mut warnings);
    let trace = take::<TraceDecl>(&texts, &mut errors, &mut warnings);
    let readiness = take::<ReadinessDecl>(&texts, &mut errors, &mut warnings);
    let evidence = take::<EvidenceDecl>(&texts, &mut errors, &mut warnings);

    let (Some(contracts), Some(dag), Some(trace), Some(readiness), Some(evidence)) =
        (contracts, dag, trace, readiness, evidence)
    else {
        return Err(BundleErrors(errors));
    };

    let bundle = ProofBundle {
        root: root.to_path_buf(),
        contracts,
        dag,
        trace,
        readiness,
        evidence,
    };
    let errors = bundle.reference_errors();
    if errors.is_empty() {
        Ok(Loaded { bundle, warnings })
    } else {
        Err(BundleErrors(errors))
    }
}

fn dangling(file: &str, id: &str, context: String) -> BundleError {
    BundleError::DanglingRef {
        file: file.to_string(),
        id: id.to_string(),
        context,
    }
}

/// Contract `depends_on` references and cycles.
pub fn contract_errors(contracts: &ContractDecl) -> Vec<BundleError> {
    let mut errors = Vec::new();
    let contract_ids: HashSet<&str> = contracts.contracts.iter().map(|c| c.id.as_str()).collect();
    for c in &contracts.contracts {
        for dep in &c.depends_on {
            if !contract_ids.contains(dep.as_str()) {
                errors.push(dangling(
                    CONTRACT_FILE,
                    dep,
                    format!("depends_on of {}", c.id),
                ));
            }
        }
    }
    let graph = contracts
        .contracts
        .iter()
        .map(|c| (c.id.as_str(), c.depends_on.as_slice()));
    if let Some(cycle) = crate::dag::find_cycle(graph) {
        errors.push(BundleError::Parse {
            file: CONTRACT_FILE.to_string(),
            line: None,
            message: format!("depends_on cycle: {}", cycle.join(" -> ")),
        });
    }
    errors
}

/// Gate claims that the evidence matrix does not declare.
pub fn readiness_errors(readiness: &ReadinessDecl, evidence: &EvidenceDecl) -> Vec<BundleError> {
    let claim_ids: HashSet<&str> = evidence.claims.iter().map(|c| c.id.as_str()).collect();
    let mut errors = Vec::new();
    for g in &readiness.gates {
        for claim in &g.required_claims {
            if !claim_ids.contains(claim.as_str()) {
                errors.push(dangling(
                    READINESS_FILE,
                    claim,
                    format!("required_claims of {}", g.id),
                ));
            }
        }
    }
    errors
}

/// Claim evidence refs and artifact check names.
pub fn evidence_errors(evidence: &EvidenceDecl, contracts: &ContractDecl) -> Vec<BundleError> {
    let contract_ids: HashSet<&str> = contracts.contracts.iter().map(|c| c.id.as_str()).collect();
    let artifact_ids: HashSet<&str> = evidence.artifacts.iter().map(|a| a.id.as_str()).collect();
    let mut errors = Vec::new();
    for c in &evidence.claims {
        for r in &c.evidence_refs {
            if !artifact_ids.contains(r.as_str()) {
                errors.push(dangling(
                    EVIDENCE_FILE,
                    r,
                    format!("evidence_refs of {}", c.id),
                ));
            }
        }
    }
    for a in &evidence.artifacts {
        for check in &a.checks {
            if !contract_ids.contains(check.as_str()) && !VALIDATOR_NAMES.contains(&check.as_str())
            {
                errors.push(dangling(
                    EVIDENCE_FILE,
                    check,
                    format!("checks of {}", a.id),
                ));
            }
        }
    }
    errors
}

impl ProofBundle {
    /// Cross-file reference and acyclicity problems.
    fn reference_errors(&self) -> Vec<BundleError> {
        let mut errors = contract_errors(&self.contracts);

        let unit_ids: HashSet<&str> = self.dag.units.iter().map(|u| u.id.as_str()).collect();
        for u in &self.dag.units {
            for dep in &u.deps {
                if !unit_ids.contains(dep.as_str()) {
                    errors.push(dangling(DAG_FILE, dep, format!("deps of {}", u.id)));
                }
            }
        }
        if errors
            .iter()
            .all(|e| !matches!(e, BundleError::DanglingRef { file, .. } if file == DAG_FILE))
        {
            if let Some(cycle) = crate::dag::detect_cycles(&self.dag) {
                errors.push(BundleError::Parse {
                    file: DAG_FILE.to_string(),
                    line: None,
                    message: format!("dependency cycle: {}", cycle.join(" -> ")),
                });
            }
        }

        let entity_ids: HashSet<&str> = self.trace.entities.iter().map(|e| e.id.as_str()).collect();
        for e in &self.trace.entities {
            for r in &e.refs {
                if !entity_ids.contains(r.as_str()) {
                    errors.push(dangling(TRACE_FILE, r, format!("refs of {}", e.id)));
                }
            }
        }

        errors.extend(readiness_errors(&self.readiness, &self.evidence));
        errors.extend(evidence_errors(&self.evidence, &self.contracts));
        errors
    }

    /// The five files as TOML text, in the fixed file order.
    pub fn to_toml_files(&self) -> Vec<(&'static str, String)> {
        vec![
            (CONTRACT_FILE, self.contracts.to_toml()),
            (DAG_FILE, self.dag.to_toml()),
            (TRACE_FILE, self.trace.to_toml()),
            (READINESS_FILE, self.readiness.to_toml()),
            (EVIDENCE_FILE, self.evidence.to_toml()),
        ]
    }

    /// Write the declarations under `dir`. Used for round-trip tests and
    /// for building mutated fixtures.
    pub fn write_declarations(&self, dir: &Path) -> io::Result<()> {
        for (file, text) in self.to_toml_files() {
            std::fs::write(dir.join(file), text)?;
        }
        Ok(())
    }

    /// True when the five declarations equal `other`'s, ignoring root.
    pub fn same_declarations(&self, other: &ProofBundle) -> bool {
        self.contracts == other.contracts
            && self.dag == other.dag
            && self.trace == other.trace
            && self.readiness == other.readiness
            && self.evidence == other.evidence
    }

    pub fn resolve(&self, path: &RelPath) -> PathBuf {
        self.root.join(path.as_str())
    }
}

/// Which declaration a path belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PathOwner {
    Contract,
    Unit,
    Entity,
    Artifact,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRow {
    pub owner: PathOwner,
    pub id: String,
    pub path: RelPath,
    pub exists: bool,
}

/// One row per path declared anywhere in the bundle, in declaration order
/// (contracts, units, entities, artifacts). Absence is data here.
pub fn declared_paths(bundle: &ProofBundle) -> Vec<PathRow> {
    let mut declared: Vec<(PathOwner, &str, &RelPath)> = Vec::new();
    for c in &bundle.contracts.contracts {
        for p in c.canonical.iter().chain(c.rewrite.iter()) {
            declared.push((PathOwner::Contract, &c.id, p));
        }
    }
    for u in &bundle.dag.units {
        for p in &u.source_paths {
            declared.push((PathOwner::Unit, &u.id, p));
        }
    }
    for e in &bundle.trace.entities {
        if let Some(p) = &e.path {
            declared.push((PathOwner::Entity, &e.id, p));
        }
    }
    for a in &bundle.evidence.artifacts {
        declared.push((PathOwner::Artifact, &a.id, &a.path));
    }
    declared
        .into_iter()
        .map(|(owner, id, path)| PathRow {
            owner,
            id: id.to_string(),
            path: path.clone(),
            exists: bundle.resolve(path).exists(),
        })
        .collect()
}

/// Entity and evidence-artifact paths only.
pub fn resolve_paths(bundle: &ProofBundle) -> Vec<PathRow> {
    declared_paths(bundle)
        .into_iter()
        .filter(|r| matches!(r.owner, PathOwner::Entity | PathOwner::Artifact))
        .collect()
}

/// Ids declared in the bundle, for callers that need set semantics.
pub fn unit_ids(dag: &DagDecl) -> BTreeSet<&str> {
    dag.units.iter().map(|u| u.id.as_str()).collect()
}
