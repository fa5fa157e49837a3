mod common;

use std::collections::BTreeSet;

use common::{bundle_copy, bundle_root, edit, options, stub_resolver};
use dagproof_core::bundle::{parse_bundle, ChainKind, Entity, Pattern, SourceProfile, TraceDecl};
use dagproof_core::outcome::Outcome;
use dagproof_core::profile::witness::{LITERAL_ABSENT, MARKER_LEAK, REWRITE_MARKERS, RUNTIME_C01};
use dagproof_core::profile::*;
use proptest::prelude::*;

const GO_REWRITE: &str = "src/go_convoluted/hello.go";
const AWK_REWRITE: &str = "src/awk_convoluted/hello.awk";

fn read(rel: &str) -> Vec<u8> {
    std::fs::read(bundle_root().join(rel)).unwrap()
}

fn naive_absent(source: &[u8], literal: &[u8]) -> bool {
    if literal.is_empty() {
        return false;
    }
    !(0..source.len().saturating_sub(literal.len() - 1))
        .any(|i| &source[i..i + literal.len()] == literal)
}

#[test]
fn literal_absence_on_fixtures() {
    assert!(literal_absent(&read(GO_REWRITE), b"Hello, world!"));
    assert!(!literal_absent(&read("src/go/hello.go"), b"Hello, world!"));
    assert!(literal_absent(b"", b"Hello, world!"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn literal_absent_matches_naive_scan(
        source in proptest::collection::vec(prop_oneof![Just(b'a'), Just(b'b'), any::<u8>()], 0..64),
        literal in proptest::collection::vec(prop_oneof![Just(b'a'), Just(b'b')], 1..4),
    ) {
        prop_assert_eq!(literal_absent(&source, &literal), naive_absent(&source, &literal));
    }
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn go_rewrite_symbols() {
    let r = extract_symbols(GO_REWRITE, &read(GO_REWRITE), "go").unwrap();
    assert_eq!(
        r.declared_functions,
        set(&["assemble", "emit", "glyphs", "main"])
    );
    let edges: BTreeSet<(&str, &str)> = r
        .call_edges
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    assert_eq!(
        edges,
        BTreeSet::from([
            ("assemble", "append"),
            ("assemble", "byte"),
            ("assemble", "glyphs"),
            ("assemble", "string"),
            ("emit", "fmt.Print"),
            ("main", "assemble"),
            ("main", "emit"),
        ])
    );
    assert_eq!(
        r.import_edges,
        BTreeSet::from([(GO_REWRITE.to_string(), "fmt".to_string())])
    );
    // every caller is a declared function
    assert!(r
        .call_edges
        .iter()
        .all(|(caller, _)| r.declared_functions.contains(caller)));
}

#[test]
fn single_function_sources() {
    for (rel, lang) in [
        ("src/rust/hello.rs", "rust"),
        ("src/java/Hello.java", "java"),
        ("src/typescript/hello.ts", "typescript"),
    ] {
        let r = extract_symbols(rel, &read(rel), lang).unwrap();
        assert_eq!(r.declared_functions, set(&["main"]), "{rel}");
        assert!(r.import_edges.is_empty(), "{rel}");
    }
    let r = extract_symbols("x.rs", b"fn only() {}\n", "rust").unwrap();
    assert_eq!(r.declared_functions, set(&["only"]));
    assert!(r.call_edges.is_empty());
}

#[test]
fn awk_is_routed_away() {
    let err = extract_symbols(AWK_REWRITE, &read(AWK_REWRITE), "awk").unwrap_err();
    assert_eq!(err, ProfileError::UnsupportedLanguage("awk".into()));
}

/// Insert whole-line comments at the given line positions.
fn with_comments(source: &str, comments: &[(usize, String)]) -> String {
    let mut lines: Vec<String> = source.lines().map(String::from).collect();
    let mut sorted = comments.to_vec();
    sorted.sort_by_key(|(at, _)| std::cmp::Reverse(*at));
    for (at, text) in sorted {
        let at = at.min(lines.len());
        lines.insert(at, text);
    }
    lines.join("\n") + "\n"
}

const DECOYS: [&str; 5] = [
    "// func decoy() { fmt.Println(\"Hello, world!\") }",
    "// fn decoy() {}",
    "/* function decoy(): number { return 1; } */",
    "// import \"os\"",
    "// plain note",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn comment_lines_do_not_matter(
        which in 0usize..4,
        positions in proptest::collection::vec(0usize..30, 1..6),
        picks in proptest::collection::vec(0usize..DECOYS.len(), 6),
        order in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let (rel, lang) = [(GO_REWRITE, "go"), ("src/rust/hello.rs", "rust"), ("src/typescript/hello.ts", "typescript"), ("src/java/Hello.java", "java")][which];
        let source = String::from_utf8(read(rel)).unwrap();
        let comments: Vec<String> = picks.iter().map(|&i| DECOYS[i].to_string()).collect();
        let placed: Vec<(usize, String)> = positions.iter().zip(&comments).map(|(&p, c)| (p, c.clone())).collect();
        let permuted: Vec<(usize, String)> = positions.iter().zip(order.iter().map(|&i| &comments[i])).map(|(&p, c)| (p, c.clone())).collect();
        let plain = extract_symbols(rel, source.as_bytes(), lang).unwrap();
        let a = extract_symbols(rel, with_comments(&source, &placed).as_bytes(), lang).unwrap();
        let b = extract_symbols(rel, with_comments(&source, &permuted).as_bytes(), lang).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &plain);
    }
}

fn names(r: &RewriteWitnessResult) -> Vec<&str> {
    r.checks.iter().map(|(k, _)| k.as_str()).collect()
}

#[test]
fn go_rewrite_witness_eight_pass() {
    let b = parse_bundle(bundle_root()).unwrap();
    let r = run_rewrite_witness(
        &b,
        "C05",
        &ScannerRegistry::reference(),
        &stub_resolver(),
        &options(),
    )
    .unwrap();
    assert_eq!(
        names(&r),
        [
            "literal-absent",
            "runtime-c01",
            "function:glyphs",
            "function:assemble",
            "function:emit",
            "function:main",
            "call-edge:main->emit",
            "import-edge:fmt",
        ]
    );
    assert_eq!(r.summary.counts_line(), "8 pass, 0 skip, 0 fail");
    assert!(r.passed());
}

#[test]
fn awk_profile_witness_six_pass() {
    let b = parse_bundle(bundle_root()).unwrap();
    let r = run_rewrite_witness(
        &b,
        "C06",
        &ScannerRegistry::reference(),
        &stub_resolver(),
        &options(),
    )
    .unwrap();
    assert_eq!(
        names(&r),
        [
            "literal-absent",
            "runtime-c01",
            "canonical-intent",
            "rewrite-intent",
            "rewrite-markers",
            "marker-leak"
        ]
    );
    assert_eq!(r.summary.counts_line(), "6 pass, 0 skip, 0 fail");
}

fn go_witness(root: &std::path::Path) -> RewriteWitnessResult {
    let b = parse_bundle(root).unwrap();
    run_rewrite_witness(
        &b,
        "C05",
        &ScannerRegistry::reference(),
        &stub_resolver(),
        &options(),
    )
    .unwrap()
}

#[test]
fn renamed_helper_fails() {
    let (_d, root) = bundle_copy();
    let path = root.join(GO_REWRITE);
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace("emit(", "send(");
    std::fs::write(&path, text).unwrap();
    let r = go_witness(&root);
    assert!(r.summary.fail >= 1);
    assert_eq!(
        r.outcome_of("function:emit").unwrap().fail_clause(),
        Some("missing-function")
    );
    assert_eq!(
        r.outcome_of("call-edge:main->emit").unwrap().fail_clause(),
        Some("missing-call-edge")
    );
}

#[test]
fn restored_literal_fails() {
    let (_d, root) = bundle_copy();
    edit(
        &root.join(GO_REWRITE),
        "fmt.Print(s)",
        "fmt.Print(\"Hello, world!\\n\")",
    );
    let r = go_witness(&root);
    assert_eq!(
        r.outcome_of(LITERAL_ABSENT).unwrap().fail_clause(),
        Some("literal-present")
    );
    assert!(!r.passed());
}

#[test]
fn missing_toolchain_skips_only_c01() {
    let b = parse_bundle(bundle_root()).unwrap();
    let resolver = stub_resolver().without_tool("go");
    let r = run_rewrite_witness(
        &b,
        "C05",
        &ScannerRegistry::reference(),
        &resolver,
        &options(),
    )
    .unwrap();
    let skipped: Vec<_> = r
        .checks
        .iter()
        .filter(|(_, o)| o.is_skip())
        .map(|(k, _)| k.as_str())
        .collect();
    assert_eq!(skipped, [RUNTIME_C01]);
    assert!(!r.passed());
    assert_eq!(r.summary.counts_line(), "7 pass, 1 skip, 0 fail");
}

#[test]
fn profile_mutations() {
    let b = parse_bundle(bundle_root()).unwrap();
    let c06 = b.contracts.get("C06").unwrap();
    let profile = c06.profile.clone().unwrap();
    let canonical = read("src/awk/hello.awk");
    let rewrite = read(AWK_REWRITE);
    let literal = c06.literal.as_deref().unwrap();

    let no_marker = String::from_utf8(rewrite.clone())
        .unwrap()
        .replace("%c", "%d");
    let r = check_profile(&canonical, no_marker.as_bytes(), literal, &profile, &|| {
        Outcome::Pass
    })
    .unwrap();
    assert_eq!(
        r.outcome_of(REWRITE_MARKERS).unwrap().fail_clause(),
        Some("marker-missing")
    );

    let mut leaky = canonical.clone();
    leaky.extend_from_slice(b"# sprintf( once\n");
    let r = check_profile(&leaky, &rewrite, literal, &profile, &|| Outcome::Pass).unwrap();
    assert_eq!(
        r.outcome_of(MARKER_LEAK).unwrap().fail_clause(),
        Some("marker-leak")
    );
}

fn arb_pattern() -> impl Strategy<Value = Pattern> {
    prop_oneof![
        "[a-z%(]{1,4}".prop_map(Pattern::Literal),
        "[a-z]{1,4}".prop_map(Pattern::Token),
    ]
}

proptest! {
    #[test]
    fn canonical_as_rewrite_never_passes(
        body in "[ a-z%(\n]{0,40}",
        literal in "[A-Z]{3,6}",
        shared in proptest::collection::vec(arb_pattern(), 1..3),
        markers in proptest::collection::vec(arb_pattern(), 1..3),
    ) {
        // canonical sources carry their literal
        let canonical = format!("{body}{literal}\n");
        let profile = SourceProfile { required_markers: vec![], shared_intent: shared, rewrite_markers: markers };
        let r = check_profile(canonical.as_bytes(), canonical.as_bytes(), &literal, &profile, &|| Outcome::Pass).unwrap();
        prop_assert!(!r.passed());
        let leak = r.outcome_of(MARKER_LEAK).unwrap().is_fail();
        let lit = r.outcome_of(LITERAL_ABSENT).unwrap().is_fail();
        prop_assert!(leak || lit);
    }
}

#[test]
fn code_symbols_reference_counts() {
    let b = parse_bundle(bundle_root()).unwrap();
    let r = check_code_symbols(&b.trace, &b.root, &ScannerRegistry::reference());
    assert_eq!((r.matched, r.skipped), (8, 4));
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    let skipped: Vec<_> = r
        .per_entity
        .iter()
        .filter(|(_, o)| o.is_skip())
        .map(|(k, _)| k.as_str())
        .collect();
    assert_eq!(
        skipped,
        [
            "CODE-AWK-BEGIN",
            "CODE-AWK-REWRITE-GLYPH",
            "CODE-AWK-REWRITE-GREETING",
            "CODE-C-MAIN"
        ]
    );
}

#[test]
fn code_symbols_misspelled() {
    let mut b = parse_bundle(bundle_root()).unwrap();
    let e = b
        .trace
        .entities
        .iter_mut()
        .find(|e| e.id == "CODE-GO-REWRITE-GLYPHS")
        .unwrap();
    e.symbol = Some("glyps".into());
    let r = check_code_symbols(&b.trace, &b.root, &ScannerRegistry::reference());
    assert_eq!((r.matched, r.skipped, r.failures.len()), (7, 4, 1));
    assert_eq!(r.failures[0].entity, "CODE-GO-REWRITE-GLYPHS");
}

#[test]
fn code_symbols_without_code_entities() {
    let t = TraceDecl {
        entities: vec![Entity::new("I", ChainKind::Intent, &[])],
    };
    let r = check_code_symbols(&t, &bundle_root(), &ScannerRegistry::reference());
    assert_eq!((r.matched, r.skipped, r.failures.len()), (0, 0, 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn code_symbol_counts_conserve(langs in proptest::collection::vec(0usize..6, 12), misspell in proptest::collection::vec(any::<bool>(), 12)) {
        let mut b = parse_bundle(bundle_root()).unwrap();
        let tags = ["rust", "go", "typescript", "java", "awk", "c"];
        let code: Vec<&mut Entity> = b.trace.entities.iter_mut().filter(|e| e.kind == ChainKind::Code).collect();
        let n = code.len();
        for (i, e) in code.into_iter().enumerate() {
            e.language = Some(tags[langs[i]].to_string());
            if misspell[i] {
                e.symbol = Some("nothing_here".into());
            }
        }
        let r = check_code_symbols(&b.trace, &b.root, &ScannerRegistry::reference());
        prop_assert_eq!(r.matched + r.skipped + r.failures.len(), n);
        prop_assert_eq!(r.skipped, langs.iter().filter(|&&l| l >= 4).count());
    }
}
