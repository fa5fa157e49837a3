//! Declared-symbol and simple-edge extraction.
//!
//! Each supported language has a token-level declaration scanner: function
//! declaration forms, calls applied inside those bodies, and import forms.
//! Scanners are looked up by language tag in a [`ScannerRegistry`], so a
//! parser-backed implementation can be dropped in behind the same trait.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::scan::{matching, tokenize, Dialect, Tok};
use super::ProfileError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SymbolReport {
    pub declared_functions: BTreeSet<String>,
    /// (caller, callee). Callees keep their qualifier, e.g. `fmt.Print`.
    pub call_edges: BTreeSet<(String, String)>,
    /// (importer file, imported module)
    pub import_edges: BTreeSet<(String, String)>,
}

pub trait SymbolScanner: Send + Sync {
    fn scan(&self, file: &str, source: &[u8]) -> SymbolReport;
}

/// Language tag -> scanner. Its keys are the supported language set.
pub struct ScannerRegistry {
    scanners: BTreeMap<String, Box<dyn SymbolScanner>>,
}

impl ScannerRegistry {
    pub fn empty() -> Self {
        ScannerRegistry {
            scanners: BTreeMap::new(),
        }
    }

    /// `rust`, `go`, `typescript`, `java`.
    pub fn reference() -> Self {
        let mut r = Self::empty();
        r.register("rust", TokenScanner(Dialect::Rust));
        r.register("go", TokenScanner(Dialect::Go));
        r.register("typescript", TokenScanner(Dialect::TypeScript));
        r.register("java", TokenScanner(Dialect::Java));
        r
    }

    pub fn register(&mut self, language: &str, scanner: impl SymbolScanner + 'static) {
        self.scanners
            .insert(language.to_string(), Box::new(scanner));
    }

    pub fn supports(&self, language: &str) -> bool {
        self.scanners.contains_key(language)
    }

    pub fn languages(&self) -> BTreeSet<&str> {
        self.scanners.keys().map(String::as_str).collect()
    }

    pub fn extract(
        &self,
        file: &str,
        source: &[u8],
        language: &str,
    ) -> Result<SymbolReport, ProfileError> {
        self.scanners
            .get(language)
            .map(|s| s.scan(file, source))
            .ok_or_else(|| ProfileError::UnsupportedLanguage(language.to_string()))
    }
}

impl Default for ScannerRegistry {
    fn default() -> Self {
        Self::reference()
    }
}

/// [`ScannerRegistry::reference`] extraction.
pub fn extract_symbols(
    file: &str,
    source: &[u8],
    language: &str,
) -> Result<SymbolReport, ProfileError> {
    ScannerRegistry::reference().extract(file, source, language)
}

const NOT_CALLEES: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "match",
    "return",
    "catch",
    "loop",
    "fn",
    "func",
    "function",
    "else",
    "case",
    "do",
    "try",
    "typeof",
    "sizeof",
    "synchronized",
    "super",
    "this",
];

const JAVA_NOT_DECL_PREV: &[&str] = &[
    "new", "return", "throw", "else", "case", "yield", "await", "assert",
];

pub struct TokenScanner(pub Dialect);

struct Decl {
    name: String,
    body: Option<(usize, usize)>,
}

impl TokenScanner {
    /// Body span `{ .. }` following a declaration name, if the declaration
    /// has one before a `;` at bracket depth 0.
    fn body_after(tokens: &[Tok], name_at: usize) -> Option<(usize, usize)> {
        let mut parens = 0i32;
        for (i, t) in tokens.iter().enumerate().skip(name_at + 1) {
            match t {
                Tok::Punct('(') | Tok::Punct('[') => parens += 1,
                Tok::Punct(')') | Tok::Punct(']') => parens -= 1,
                Tok::Punct(';') if parens == 0 => return None,
                Tok::Punct('{') if parens == 0 => {
                    return matching(tokens, i, '{', '}').map(|end| (i, end))
                }
                _ => {}
            }
        }
        None
    }

    fn declarations(&self, tokens: &[Tok]) -> Vec<Decl> {
        let mut decls = Vec::new();
        let mut depth = 0usize;
        for (i, t) in tokens.iter().enumerate() {
            match t {
                Tok::Punct('{') => depth += 1,
                Tok::Punct('}') => depth = depth.saturating_sub(1),
                _ => {}
            }
            let name_at = match self.0 {
                Dialect::Rust if t.is_ident("fn") => {
                    tokens.get(i + 1).and_then(Tok::ident).map(|_| i + 1)
                }
                Dialect::TypeScript if t.is_ident("function") => {
                    let j = if tokens.get(i + 1).is_some_and(|t| t.is_punct('*')) {
                        i + 2
                    } else {
                        i + 1
                    };
                    tokens.get(j).and_then(Tok::ident).map(|_| j)
                }
                Dialect::TypeScript if t.is_ident("const") || t.is_ident("let") => {
                    Self::ts_arrow(tokens, i)
                }
                Dialect::Go if t.is_ident("func") && depth == 0 => Self::go_func_name(tokens, i),
                Dialect::Java => Self::java_method(tokens, i),
                _ => None,
            };
            if let Some(at) = name_at {
                let name = tokens[at].ident().unwrap_or_default().to_string();
                decls.push(Decl {
                    name,
                    body: Self::body_after(tokens, at),
                });
            }
        }
        decls
    }

    /// `func name(` or `func (recv T) name(`
    fn go_func_name(tokens: &[Tok], func_at: usize) -> Option<usize> {
        let next = tokens.get(func_at + 1)?;
        if next.ident().is_some() {
            return Some(func_at + 1);
        }
        if next.is_punct('(') {
            let close = matching(tokens, func_at + 1, '(', ')')?;
            let name = tokens.get(close + 1)?;
            if name.ident().is_some()
                && tokens
                    .get(close + 2)
                    .is_some_and(|t| t.is_punct('(') || t.is_punct('['))
            {
                return Some(close + 1);
            }
        }
        None
    }

    /// `const name = (...) =>` / `const name = function`
    fn ts_arrow(tokens: &[Tok], kw_at: usize) -> Option<usize> {
        tokens.get(kw_at + 1)?.ident()?;
        let mut j = kw_at + 2;
        if tokens.get(j)?.is_punct(':') {
            // skip a simple type annotation
            while j < tokens.len() && !tokens[j].is_punct('=') {
                j += 1;
            }
        }
        if !tokens.get(j)?.is_punct('=') {
            return None;
        }
        let mut k = j + 1;
        if tokens.get(k).is_some_and(|t| t.is_ident("async")) {
            k += 1;
        }
        let value = tokens.get(k)?;
        if value.is_ident("function") {
            return Some(kw_at + 1);
        }
        if value.is_punct('(') {
            let close = matching(tokens, k, '(', ')')?;
            let mut after = close + 1;
            if tokens.get(after).is_some_and(|t| t.is_punct(':')) {
                while after < tokens.len() && !tokens[after].is_punct('=') {
                    after += 1;
                }
            }
            if tokens.get(after).is_some_and(|t| t.is_punct('='))
                && tokens.get(after + 1).is_some_and(|t| t.is_punct('>'))
            {
                return Some(kw_at + 1);
            }
        }
        None
    }

    /// `Type name(...) {` or `Type name(...) throws X {`
    fn java_method(tokens: &[Tok], at: usize) -> Option<usize> {
        let name = tokens[at].ident()?;
        if NOT_CALLEES.contains(&name) || JAVA_NOT_DECL_PREV.contains(&name) {
            return None;
        }
        if !tokens.get(at + 1)?.is_punct('(') {
            return None;
        }
        let prev = tokens.get(at.checked_sub(1)?)?;
        let prev_ok = match prev {
            Tok::Ident(p) => {
                !JAVA_NOT_DECL_PREV.contains(&p.as_str()) && !NOT_CALLEES.contains(&p.as_str())
            }
            Tok::Punct('>') | Tok::Punct(']') => true,
            _ => false,
        };
        if !prev_ok {
            return None;
        }
        let close = matching(tokens, at + 1, '(', ')')?;
        let after = tokens.get(close + 1)?;
        (after.is_punct('{') || after.is_ident("throws")).then_some(at)
    }

    /// `a.b.name` or `a::name` ending at `at`.
    fn qualified(tokens: &[Tok], at: usize) -> String {
        let mut parts = vec![tokens[at].ident().unwrap_or_default().to_string()];
        let mut i = at;
        loop {
            if i >= 2 && tokens[i - 1].is_punct('.') {
                if let Some(q) = tokens[i - 2].ident() {
                    parts.push(".".into());
                    parts.push(q.to_string());
                    i -= 2;
                    continue;
                }
            }
            if i >= 3 && tokens[i - 1].is_punct(':') && tokens[i - 2].is_punct(':') {
                if let Some(q) = tokens[i - 3].ident() {
                    parts.push("::".into());
                    parts.push(q.to_string());
                    i -= 3;
                    continue;
                }
            }
            break;
        }
        parts.reverse();
        parts.concat()
    }

    fn imports(&self, tokens: &[Tok]) -> Vec<String> {
        let mut out = Vec::new();
        for (i, t) in tokens.iter().enumerate() {
            match self.0 {
                Dialect::Go if t.is_ident("import") => {
                    let end = if tokens.get(i + 1).is_some_and(|t| t.is_punct('(')) {
                        matching(tokens, i + 1, '(', ')').unwrap_or(tokens.len() - 1)
                    } else {
                        // optional alias, then the path
                        (i + 3).min(tokens.len() - 1)
                    };
                    let mut j = i + 1;
                    while j <= end {
                        if let Tok::Str(path) = &tokens[j] {
                            out.push(path.clone());
                            if !tokens.get(i + 1).is_some_and(|t| t.is_punct('(')) {
                                break;
                            }
                        }
                        j += 1;
                    }
                }
                Dialect::Rust if t.is_ident("use") || t.is_ident("extern") => {
                    let mut path = String::new();
                    let start = if t.is_ident("extern") {
                        if !tokens.get(i + 1).is_some_and(|t| t.is_ident("crate")) {
                            continue;
                        }
                        i + 2
                    } else {
                        i + 1
                    };
                    for tok in &tokens[start..] {
                        match tok {
                            Tok::Ident(s) if s == "as" => break,
                            Tok::Ident(s) => path.push_str(s),
                            Tok::Punct(':') => path.push(':'),
                            _ => break,
                        }
                    }
                    let path = path.trim_end_matches(':').to_string();
                    if !path.is_empty() {
                        out.push(path);
                    }
                }
                Dialect::TypeScript if t.is_ident("import") || t.is_ident("export") => {
                    if let Some(Tok::Str(m)) = tokens.get(i + 1) {
                        out.push(m.clone());
                        continue;
                    }
                    if t.is_ident("export")
                        && !tokens
                            .get(i + 1)
                            .is_some_and(|t| t.is_punct('{') || t.is_punct('*'))
                    {
                        continue;
                    }
                    let stop = tokens[i + 1..]
                        .iter()
                        .position(|t| t.is_punct(';'))
                        .map_or(tokens.len(), |p| i + 1 + p);
                    for j in i + 1..stop {
                        if tokens[j].is_ident("from") {
                            if let Some(Tok::Str(m)) = tokens.get(j + 1) {
                                out.push(m.clone());
                            }
                            break;
                        }
                    }
                }
                Dialect::TypeScript if t.is_ident("require") => {
                    if tokens.get(i + 1).is_some_and(|t| t.is_punct('(')) {
                        if let Some(Tok::Str(m)) = tokens.get(i + 2) {
                            out.push(m.clone());
                        }
                    }
                }
                Dialect::Java if t.is_ident("import") => {
                    let mut path = String::new();
                    for tok in &tokens[i + 1..] {
                        match tok {
                            Tok::Ident(s) if s == "static" && path.is_empty() => {}
                            Tok::Ident(s) => path.push_str(s),
                            Tok::Punct('.') => path.push('.'),
                            Tok::Punct('*') => path.push('*'),
                            _ => break,
                        }
                    }
                    if !path.is_empty() {
                        out.push(path);
                    }
                }
                _ => {}
            }
        }
        out
    }
}

impl SymbolScanner for TokenScanner {
    fn scan(&self, file: &str, source: &[u8]) -> SymbolReport {
        let tokens = tokenize(source, self.0);
        let decls = self.declarations(&tokens);

        let mut report = SymbolReport::default();
        report.declared_functions = decls.iter().map(|d| d.name.clone()).collect();

        for (i, t) in tokens.iter().enumerate() {
            let Some(name) = t.ident() else { continue };
            if NOT_CALLEES.contains(&name) || !tokens.get(i + 1).is_some_and(|n| n.is_punct('(')) {
                continue;
            }
            let prev = i.checked_sub(1).and_then(|p| tokens.get(p));
            if prev
                .is_some_and(|p| p.is_ident("fn") || p.is_ident("func") || p.is_ident("function"))
            {
                continue;
            }
            // innermost declared body containing the call
            let caller = decls
                .iter()
                .filter_map(|d| d.body.map(|(s, e)| (d, s, e)))
                .filter(|(_, s, e)| *s < i && i < *e)
                .min_by_key(|(_, s, e)| e - s)
                .map(|(d, _, _)| d.name.clone());
            if let Some(caller) = caller {
                report
                    .call_edges
                    .insert((caller, Self::qualified(&tokens, i)));
            }
        }

        for module in self.imports(&tokens) {
            report.import_edges.insert((file.to_string(), module));
        }
        report
    }
}
