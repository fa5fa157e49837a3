//! Rewrite witnesses: the supported-language symbol check list and the
//! declared-profile fallback for languages without a scanner.

use memchr::memmem;

use crate::bundle::{Contract, Pattern, ProofBundle, SourceProfile, WitnessKind};
use crate::harness::{runtime_c01, HarnessOptions, ToolResolver};
use crate::outcome::{Outcome, RunSummary};

use super::symbols::ScannerRegistry;
use super::ProfileError;

pub const LITERAL_ABSENT: &str = "literal-absent";
pub const RUNTIME_C01: &str = "runtime-c01";
pub const CANONICAL_INTENT: &str = "canonical-intent";
pub const REWRITE_INTENT: &str = "rewrite-intent";
pub const REWRITE_MARKERS: &str = "rewrite-markers";
pub const MARKER_LEAK: &str = "marker-leak";

/// True iff `literal` does not occur contiguously in `source`. An empty
/// literal occurs everywhere, so it is never absent.
pub fn literal_absent(source: &[u8], literal: &[u8]) -> bool {
    !literal.is_empty() && memmem::find(source, literal).is_none()
}

fn is_word(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Literal patterns match as byte substrings; token patterns need a
/// non-identifier byte (or the edge of the source) on both sides.
pub fn pattern_matches(source: &[u8], pattern: &Pattern) -> bool {
    match pattern {
        Pattern::Literal(lit) => !lit.is_empty() && memmem::find(source, lit.as_bytes()).is_some(),
        Pattern::Token(tok) => {
            let needle = tok.as_bytes();
            if needle.is_empty() {
                return false;
            }
            memmem::find_iter(source, needle).any(|at| {
                let end = at + needle.len();
                let left = at == 0 || !is_word(source[at - 1]);
                let right = end == source.len() || !is_word(source[end]);
                left && right
            })
        }
    }
}

fn describe(p: &Pattern) -> String {
    match p {
        Pattern::Literal(s) => format!("literal {s:?}"),
        Pattern::Token(s) => format!("token {s:?}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteWitnessResult {
    pub checks: Vec<(String, Outcome)>,
    pub summary: RunSummary,
}

impl RewriteWitnessResult {
    fn new(checks: Vec<(String, Outcome)>) -> Self {
        let summary = RunSummary::from_outcomes(checks.iter().map(|(k, o)| (k.clone(), o.clone())));
        RewriteWitnessResult { checks, summary }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(_, o)| o.is_pass())
    }

    pub fn outcome_of(&self, check: &str) -> Option<&Outcome> {
        self.checks.iter().find(|(k, _)| k == check).map(|(_, o)| o)
    }
}

/// What a supported-language rewrite must still declare.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteExpectation {
    pub literal: String,
    pub functions: Vec<String>,
    pub calls: Vec<(String, String)>,
    pub imports: Vec<String>,
}

impl RewriteExpectation {
    pub fn from_contract(c: &Contract) -> Self {
        RewriteExpectation {
            literal: c.literal.clone().unwrap_or_default(),
            functions: c.expected_functions.clone(),
            calls: c.expected_calls.clone(),
            imports: c.expected_imports.clone(),
        }
    }
}

fn literal_check(rewrite: &[u8], literal: &str) -> Outcome {
    if literal.is_empty() {
        Outcome::fail_with("literal-present", "no literal declared")
    } else if literal_absent(rewrite, literal.as_bytes()) {
        Outcome::Pass
    } else {
        Outcome::fail_with(
            "literal-present",
            format!("{literal:?} occurs in the rewrite"),
        )
    }
}

/// Literal absence, C01 through the harness hook, then one check per
/// expected function, call edge and import.
pub fn check_rewrite_supported(
    canonical: &[u8],
    rewrite: &[u8],
    language: &str,
    expect: &RewriteExpectation,
    registry: &ScannerRegistry,
    c01_runner: &dyn Fn() -> Outcome,
) -> Result<RewriteWitnessResult, ProfileError> {
    let report = registry.extract("rewrite", rewrite, language)?;
    // the canonical side must at least be scannable
    registry.extract("canonical", canonical, language)?;

    let mut checks = vec![
        (
            LITERAL_ABSENT.to_string(),
            literal_check(rewrite, &expect.literal),
        ),
        (RUNTIME_C01.to_string(), c01_runner()),
    ];
    for f in &expect.functions {
        let o = if report.declared_functions.contains(f) {
            Outcome::Pass
        } else {
            Outcome::fail_with("missing-function", f)
        };
        checks.push((format!("function:{f}"), o));
    }
    for (from, to) in &expect.calls {
        let found = report.call_edges.contains(&(from.clone(), to.clone()));
        let o = if found {
            Outcome::Pass
        } else {
            Outcome::fail_with("missing-call-edge", format!("{from} -> {to}"))
        };
        checks.push((format!("call-edge:{from}->{to}"), o));
    }
    for m in &expect.imports {
        let found = report.import_edges.iter().any(|(_, module)| module == m);
        let o = if found {
            Outcome::Pass
        } else {
            Outcome::fail_with("missing-import", m)
        };
        checks.push((format!("import-edge:{m}"), o));
    }
    Ok(RewriteWitnessResult::new(checks))
}

fn unmatched<'a>(source: &[u8], patterns: impl IntoIterator<Item = &'a Pattern>) -> Vec<String> {
    patterns
        .into_iter()
        .filter(|p| !pattern_matches(source, p))
        .map(describe)
        .collect()
}

fn all_match(clause: &str, missing: Vec<String>) -> Outcome {
    if missing.is_empty() {
        Outcome::Pass
    } else {
        Outcome::fail_with(clause, missing.join(", "))
    }
}

/// The six-check fallback for languages without a scanner.
pub fn check_profile(
    canonical: &[u8],
    rewrite: &[u8],
    literal: &str,
    profile: &SourceProfile,
    c01_runner: &dyn Fn() -> Outcome,
) -> Result<RewriteWitnessResult, ProfileError> {
    if profile.shared_intent.is_empty() || profile.rewrite_markers.is_empty() {
        return Err(ProfileError::EmptyProfile);
    }
    let canonical_missing = unmatched(
        canonical,
        profile
            .required_markers
            .iter()
            .chain(&profile.shared_intent),
    );
    let leaked: Vec<String> = profile
        .rewrite_markers
        .iter()
        .filter(|p| pattern_matches(canonical, p))
        .map(describe)
        .collect();

    let checks = vec![
        (LITERAL_ABSENT.to_string(), literal_check(rewrite, literal)),
        (RUNTIME_C01.to_string(), c01_runner()),
        (
            CANONICAL_INTENT.to_string(),
            all_match("intent-missing", canonical_missing),
        ),
        (
            REWRITE_INTENT.to_string(),
            all_match("intent-missing", unmatched(rewrite, &profile.shared_intent)),
        ),
        (
            REWRITE_MARKERS.to_string(),
            all_match(
                "marker-missing",
                unmatched(rewrite, &profile.rewrite_markers),
            ),
        ),
        (MARKER_LEAK.to_string(), all_match("marker-leak", leaked)),
    ];
    Ok(RewriteWitnessResult::new(checks))
}

/// Run the rewrite witness declared by `contract_id`: symbol checks when the
/// contract's language has a scanner, the declared profile otherwise.
pub fn run_rewrite_witness(
    bundle: &ProofBundle,
    contract_id: &str,
    registry: &ScannerRegistry,
    resolver: &dyn ToolResolver,
    options: &HarnessOptions,
) -> Result<RewriteWitnessResult, ProfileError> {
    let contract = bundle
        .contracts
        .get(contract_id)
        .ok_or_else(|| ProfileError::UnknownContract(contract_id.to_string()))?;
    if !matches!(
        contract.witness,
        WitnessKind::SymbolRewrite | WitnessKind::SourceProfile
    ) {
        return Err(ProfileError::NotRewriteContract(contract_id.to_string()));
    }
    let read = |p: &Option<crate::bundle::RelPath>, field: &str| -> Result<Vec<u8>, ProfileError> {
        let rel = p.as_ref().ok_or_else(|| {
            ProfileError::MissingField(contract_id.to_string(), field.to_string())
        })?;
        let path = bundle.resolve(rel);
        std::fs::read(&path)
            .map_err(|e| ProfileError::Read(path.display().to_string(), e.to_string()))
    };
    let canonical = read(&contract.canonical, "canonical")?;
    let rewrite = read(&contract.rewrite, "rewrite")?;

    let expected = bundle
        .contracts
        .byte_exact()
        .and_then(|c| c.expected_stdout.as_ref())
        .map(|e| e.0.clone());
    let c01 = || match (contract.invocation(), &expected) {
        (Some(inv), Some(exp)) => {
            runtime_c01(contract_id, &inv, &bundle.root, exp, resolver, options)
        }
        (None, _) => Outcome::fail_with("no-invocation", "contract declares no run command"),
        (_, None) => Outcome::fail_with("no-expectation", "bundle declares no byte-exact contract"),
    };

    let language = contract.language.as_deref().unwrap_or_default();
    match (&contract.witness, registry.supports(language)) {
        (WitnessKind::SymbolRewrite, true) => check_rewrite_supported(
            &canonical,
            &rewrite,
            language,
            &RewriteExpectation::from_contract(contract),
            registry,
            &c01,
        ),
        (_, _) => {
            let profile = contract
                .profile
                .as_ref()
                .ok_or(ProfileError::EmptyProfile)?;
            check_profile(
                &canonical,
                &rewrite,
                contract.literal.as_deref().unwrap_or_default(),
                profile,
                &c01,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_absence_basics() {
        assert!(literal_absent(b"", b"Hello"));
        assert!(!literal_absent(b"say Hello there", b"Hello"));
        assert!(literal_absent(b"say Hell o", b"Hello"));
        assert!(!literal_absent(b"anything", b""));
    }

    #[test]
    fn token_needs_boundaries() {
        let tok = Pattern::Token("print".into());
        assert!(pattern_matches(b"BEGIN { print x }", &tok));
        assert!(!pattern_matches(b"BEGIN { printf x }", &tok));
        assert!(pattern_matches(b"print", &tok));
        assert!(pattern_matches(
            b"x = sprintf(",
            &Pattern::Literal("sprintf(".into())
        ));
    }

    fn profile() -> SourceProfile {
        SourceProfile {
            required_markers: vec![Pattern::Literal("Hello".into())],
            shared_intent: vec![
                Pattern::Token("BEGIN".into()),
                Pattern::Token("print".into()),
            ],
            rewrite_markers: vec![Pattern::Literal("sprintf(".into())],
        }
    }

    #[test]
    fn profile_checks() {
        let canonical = b"BEGIN { print \"Hello\" }";
        let rewrite = b"BEGIN { print sprintf(\"%c\", 72) }";
        let r = check_profile(canonical, rewrite, "Hello", &profile(), &|| Outcome::Pass).unwrap();
        assert_eq!(r.summary.counts_line(), "6 pass, 0 skip, 0 fail");
        assert!(r.passed());

        let r = check_profile(
            canonical,
            b"BEGIN { print 72 }",
            "Hello",
            &profile(),
            &|| Outcome::Pass,
        )
        .unwrap();
        assert_eq!(
            r.outcome_of(REWRITE_MARKERS).unwrap().fail_clause(),
            Some("marker-missing")
        );

        let leaky = b"BEGIN { print sprintf(\"Hello\") }";
        let r = check_profile(leaky, rewrite, "Hello", &profile(), &|| Outcome::Pass).unwrap();
        assert_eq!(
            r.outcome_of(MARKER_LEAK).unwrap().fail_clause(),
            Some("marker-leak")
        );
    }

    #[test]
    fn empty_profile_rejected() {
        let mut p = profile();
        p.rewrite_markers.clear();
        assert_eq!(
            check_profile(b"", b"", "x", &p, &|| Outcome::Pass).unwrap_err(),
            ProfileError::EmptyProfile
        );
    }

    #[test]
    fn supported_rewrite_skips_only_c01_without_toolchain() {
        let src = b"package main\nimport \"fmt\"\nfunc emit() { fmt.Print(\"x\") }\nfunc main() { emit() }\n";
        let expect = RewriteExpectation {
            literal: "Hello".into(),
            functions: vec!["emit".into(), "main".into()],
            calls: vec![("main".into(), "emit".into())],
            imports: vec!["fmt".into()],
        };
        let reg = ScannerRegistry::reference();
        let r = check_rewrite_supported(src, src, "go", &expect, &reg, &|| {
            Outcome::skip("missing tools: go")
        })
        .unwrap();
        let skipped: Vec<_> = r
            .checks
            .iter()
            .filter(|(_, o)| o.is_skip())
            .map(|(k, _)| k.as_str())
            .collect();
        assert_eq!(skipped, [RUNTIME_C01]);
        assert!(!r.passed());
        assert_eq!(r.summary.counts_line(), "5 pass, 1 skip, 0 fail");
    }
}
