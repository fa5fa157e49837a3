//! Structural conformance of single instance files against a rules
//! directory: file-kind recognition, required tables, identifier formats.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::outcome::Outcome;

pub const RULES_FILE: &str = "conformance_rules.toml";

#[derive(Debug, Error)]
pub enum ConformanceError {
    #[error("cannot read {0}: {1}")]
    Unreadable(PathBuf, String),
    #[error("{0}: {1}")]
    BadRules(PathBuf, String),
}

#[derive(Debug, Clone, Deserialize)]
struct KindRule {
    file: String,
    #[serde(default)]
    required: Vec<String>,
    #[serde(default)]
    id_format: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
struct RulesFile {
    kind: BTreeMap<String, KindRule>,
}

/// Compiled rules for every recognised file kind.
#[derive(Debug, Clone)]
pub struct ConformanceRules {
    kinds: Vec<(String, KindRule, Vec<(String, Regex)>)>,
}

impl ConformanceRules {
    pub fn load(spec_root: &Path) -> Result<Self, ConformanceError> {
        let path = spec_root.join(RULES_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ConformanceError::Unreadable(path.clone(), e.to_string()))?;
        Self::parse(&text).map_err(|m| ConformanceError::BadRules(path, m))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: RulesFile = toml::from_str(text).map_err(|e| e.message().to_string())?;
        let mut kinds = Vec::new();
        for (name, rule) in raw.kind {
            let mut formats = Vec::new();
            for (table, pattern) in &rule.id_format {
                let re =
                    Regex::new(pattern).map_err(|e| format!("kind {name}, table {table}: {e}"))?;
                formats.push((table.clone(), re));
            }
            kinds.push((name, rule, formats));
        }
        Ok(ConformanceRules { kinds })
    }

    /// Kind name for a file, by file name.
    pub fn kind_of(&self, file_name: &str) -> Option<&str> {
        self.kinds
            .iter()
            .find(|(_, r, _)| r.file == file_name)
            .map(|(k, _, _)| k.as_str())
    }

    /// Check one instance's text against the rules for `file_name`.
    pub fn check(&self, file_name: &str, text: &str) -> Outcome {
        let Some((kind, rule, formats)) = self.kinds.iter().find(|(_, r, _)| r.file == file_name)
        else {
            return Outcome::fail_with("unknown-kind", format!("no rule recognises {file_name}"));
        };
        let doc: toml::Table = match toml::from_str(text) {
            Ok(doc) => doc,
            Err(e) => return Outcome::fail_with("parse-error", e.message()),
        };
        let missing: Vec<&str> = rule
            .required
            .iter()
            .filter(|t| !doc.contains_key(t.as_str()))
            .map(String::as_str)
            .collect();
        if !missing.is_empty() {
            return Outcome::fail_with(
                "missing-table",
                format!("{kind} needs [{}]", missing.join("], [")),
            );
        }
        let mut bad = Vec::new();
        for (table, re) in formats {
            let entries: Vec<&toml::Table> = match doc.get(table) {
                Some(toml::Value::Array(items)) => {
                    items.iter().filter_map(toml::Value::as_table).collect()
                }
                Some(toml::Value::Table(t)) => vec![t],
                _ => Vec::new(),
            };
            for (i, entry) in entries.iter().enumerate() {
                match entry.get("id").and_then(toml::Value::as_str) {
                    Some(id) if re.is_match(id) => {}
                    Some(id) => bad.push(format!("{table} id {id:?}")),
                    None => bad.push(format!("{table} #{} has no id", i + 1)),
                }
            }
        }
        if bad.is_empty() {
            Outcome::Pass
        } else {
            Outcome::fail_with("id-format", bad.join(", "))
        }
    }
}

/// Instance files can only be judged against a rules directory; without
/// one the check fails rather than passing vacuously.
pub fn conformance_check(
    file: &Path,
    spec_root: Option<&Path>,
) -> Result<Outcome, ConformanceError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| ConformanceError::Unreadable(file.to_path_buf(), e.to_string()))?;
    let Some(spec_root) = spec_root else {
        return Ok(Outcome::fail_with(
            "spec-root-required",
            "spec root is required for instance files",
        ));
    };
    let rules = ConformanceRules::load(spec_root)?;
    let name = file
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(rules.check(&name, &text))
}
