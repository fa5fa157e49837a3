//! Typed contents of the five declaration files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::escape::ExpectedOutput;
use crate::outcome::Status;

/// Bundle-relative path with forward slashes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelPath(String);

impl RelPath {
    pub fn new(raw: &str) -> Result<Self, String> {
        let unified = raw.replace('\\', "/");
        let bytes = unified.as_bytes();
        let has_drive = bytes.len() >= 2 && bytes[1] == b':' && bytes[0].is_ascii_alphabetic();
        if unified.starts_with('/') || has_drive {
            return Err(format!("path `{raw}` must be relative to the bundle root"));
        }
        let parts: Vec<&str> = unified
            .split('/')
            .filter(|p| !p.is_empty() && *p != ".")
            .collect();
        if parts.contains(&"..") {
            return Err(format!("path `{raw}` leaves the bundle root"));
        }
        if parts.is_empty() {
            return Err(format!("path `{raw}` is empty"));
        }
        Ok(RelPath(parts.join("/")))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RelPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for RelPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for RelPath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        RelPath::new(&raw).map_err(serde::de::Error::custom)
    }
}

/// Tools, build steps, and run command for something the harness executes.
///
/// `{root}` in an argument expands to the bundle root and `{work}` to the
/// isolated working directory of the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub requires: Vec<String>,
    pub build: Vec<Vec<String>>,
    pub run: Vec<String>,
}

// ---------------------------------------------------------------------------
// contract_declaration.toml

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    RuntimeSuite,
    #[serde(alias = "go-rewrite")]
    SymbolRewrite,
    SourceProfile,
}

/// Which byte-level rule a runtime contract enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuntimeCheck {
    ByteExact,
    Ascii,
    NoMarkup,
    NoBom,
}

/// Fixed byte sequence, or a whole-word token bounded by non-identifier
/// bytes. No case folding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Literal(String),
    Token(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProfile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub required_markers: Vec<Pattern>,
    #[serde(default)]
    pub shared_intent: Vec<Pattern>,
    #[serde(default)]
    pub rewrite_markers: Vec<Pattern>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contract {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub domain: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depends_on: Vec<String>,
    pub witness: WitnessKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<RuntimeCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_stdout: Option<ExpectedOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<RelPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewrite: Option<RelPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected_functions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected_calls: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected_imports: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requires: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub build: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_claims: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<SourceProfile>,
}

impl Contract {
    pub fn invocation(&self) -> Option<Invocation> {
        self.run.as_ref().map(|run| Invocation {
            requires: self.requires.clone(),
            build: self.build.clone(),
            run: run.clone(),
        })
    }

    /// Field-level problems for this contract's witness kind.
    pub(crate) fn shape_problems(&self) -> Vec<String> {
        let mut missing = Vec::new();
        match self.witness {
            WitnessKind::RuntimeSuite => match self.check {
                None => missing.push("check"),
                Some(RuntimeCheck::ByteExact) if self.expected_stdout.is_none() => {
                    missing.push("expected_stdout")
                }
                _ => {}
            },
            WitnessKind::SymbolRewrite | WitnessKind::SourceProfile => {
                if self.canonical.is_none() {
                    missing.push("canonical");
                }
                if self.rewrite.is_none() {
                    missing.push("rewrite");
                }
                if self.literal.as_deref().is_none_or(str::is_empty) {
                    missing.push("literal");
                }
                if self.run.is_none() {
                    missing.push("run");
                }
                if self.witness == WitnessKind::SymbolRewrite && self.language.is_none() {
                    missing.push("language");
                }
                if self.witness == WitnessKind::SourceProfile && self.profile.is_none() {
                    missing.push("profile");
                }
            }
        }
        let mut problems: Vec<String> = missing
            .into_iter()
            .map(|field| format!("contract {} is missing `{field}`", self.id))
            .collect();
        if matches!(&self.run, Some(run) if run.is_empty()) {
            problems.push(format!("contract {} has an empty `run` command", self.id));
        }
        problems
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractDecl {
    #[serde(rename = "contract", default)]
    pub contracts: Vec<Contract>,
}

impl ContractDecl {
    pub fn get(&self, id: &str) -> Option<&Contract> {
        self.contracts.iter().find(|c| c.id == id)
    }

    /// The contract whose check is the byte-exact comparison.
    pub fn byte_exact(&self) -> Option<&Contract> {
        self.contracts.iter().find(|c| {
            c.witness == WitnessKind::RuntimeSuite && c.check == Some(RuntimeCheck::ByteExact)
        })
    }
}

// ---------------------------------------------------------------------------
// implementation_dag.toml

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default)]
    pub tier: u32,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub language: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deps: Vec<String>,
    pub loc: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub source_paths: Vec<RelPath>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requires: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub build: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<Vec<String>>,
}

impl Unit {
    /// Bare unit with dependencies and a LOC weight.
    pub fn new(id: impl Into<String>, deps: &[&str], loc: u64) -> Self {
        Unit {
            id: id.into(),
            name: String::new(),
            tier: 1,
            language: String::new(),
            deps: deps.iter().map(|d| d.to_string()).collect(),
            loc,
            source_paths: Vec::new(),
            requires: Vec::new(),
            build: Vec::new(),
            run: None,
        }
    }

    pub fn invocation(&self) -> Option<Invocation> {
        self.run.as_ref().map(|run| Invocation {
            requires: self.requires.clone(),
            build: self.build.clone(),
            run: run.clone(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputedValues {
    pub unit_count: usize,
    #[serde(with = "layer_keys")]
    pub layer_counts: BTreeMap<u32, usize>,
    pub entry_points: BTreeSet<String>,
    pub leaf_nodes: BTreeSet<String>,
    pub critical_path: Vec<String>,
    pub critical_path_loc: u64,
}

/// TOML table keys are strings; layers are integers.
mod layer_keys {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, usize>, s: S) -> Result<S::Ok, S::Error> {
        let keyed: BTreeMap<String, usize> = map.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        keyed.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, usize>, D::Error> {
        BTreeMap::<String, usize>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.parse::<u32>()
                    .map(|layer| (layer, v))
                    .map_err(|_| D::Error::custom(format!("layer key `{k}` is not an integer")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagDecl {
    #[serde(rename = "unit", default)]
    pub units: Vec<Unit>,
    #[serde(rename = "computed", default, skip_serializing_if = "Option::is_none")]
    pub declared_computed: Option<ComputedValues>,
}

impl DagDecl {
    pub fn from_units(units: Vec<Unit>) -> Self {
        DagDecl {
            units,
            declared_computed: None,
        }
    }

    pub fn get(&self, id: &str) -> Option<&Unit> {
        self.units.iter().find(|u| u.id == id)
    }
}

// ---------------------------------------------------------------------------
// traceability.toml

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Intent,
    Requirement,
    Implementation,
    Code,
    Test,
    Output,
}

impl ChainKind {
    pub const ALL: [ChainKind; 6] = [
        ChainKind::Intent,
        ChainKind::Requirement,
        ChainKind::Implementation,
        ChainKind::Code,
        ChainKind::Test,
        ChainKind::Output,
    ];

    /// Position in the chain, intent = 0 through output = 5.
    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn predecessor(self) -> Option<ChainKind> {
        self.rank()
            .checked_sub(1)
            .map(|r| ChainKind::ALL[r as usize])
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChainKind::Intent => "intent",
            ChainKind::Requirement => "requirement",
            ChainKind::Implementation => "implementation",
            ChainKind::Code => "code",
            ChainKind::Test => "test",
            ChainKind::Output => "output",
        }
    }
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub kind: ChainKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<RelPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
}

impl Entity {
    pub fn new(id: impl Into<String>, kind: ChainKind, refs: &[&str]) -> Self {
        Entity {
            id: id.into(),
            kind,
            refs: refs.iter().map(|r| r.to_string()).collect(),
            path: None,
            language: None,
            symbol: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDecl {
    #[serde(rename = "entity", default)]
    pub entities: Vec<Entity>,
}

// ---------------------------------------------------------------------------
// review_readiness.toml

fn pass() -> Status {
    Status::Pass
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub required_claims: Vec<String>,
    #[serde(default = "pass")]
    pub required_outcome: Status,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadinessDecl {
    #[serde(rename = "gate", default)]
    pub gates: Vec<Gate>,
}

// ---------------------------------------------------------------------------
// evidence_matrix.toml

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub statement: String,
    pub evidence_refs: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    Script,
    Declaration,
    Source,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceArtifact {
    pub id: String,
    pub path: RelPath,
    pub kind: ArtifactKind,
    /// Contract ids or validator names whose report rows count as this
    /// artifact's evidence.
    #[serde(default)]
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceDecl {
    #[serde(rename = "claim", default)]
    pub claims: Vec<Claim>,
    #[serde(rename = "artifact", default)]
    pub artifacts: Vec<EvidenceArtifact>,
}

impl EvidenceDecl {
    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn artifact(&self, id: &str) -> Option<&EvidenceArtifact> {
        self.artifacts.iter().find(|a| a.id == id)
    }
}
