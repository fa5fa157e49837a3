//! Command-availability oracles.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

/// Names an environment variable holding a stub-toolchain manifest path.
pub const TOOL_MANIFEST_ENV: &str = "DAGPROOF_TOOL_MANIFEST";

/// Answers whether a command is available and where it lives. Must be safe
/// to query from several threads at once.
pub trait ToolResolver: Send + Sync {
    fn resolve(&self, tool: &str) -> Option<PathBuf>;

    fn is_available(&self, tool: &str) -> bool {
        self.resolve(tool).is_some()
    }
}

/// Production resolver: searches the executable search path.
#[derive(Debug, Clone, Copy, Default)]
pub struct PathResolver;

impl ToolResolver for PathResolver {
    fn resolve(&self, tool: &str) -> Option<PathBuf> {
        which::which(tool).ok()
    }
}

#[derive(Debug, Error)]
pub enum ResolverError {
    #[error("cannot read tool manifest {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid tool manifest {path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestEntry {
    Path(String),
    Flag(bool),
}

#[derive(Deserialize)]
struct ManifestFile {
    #[serde(default)]
    tools: BTreeMap<String, ManifestEntry>,
}

/// Hermetic resolver backed by an explicit tool table. Tools not listed
/// are absent.
///
/// Manifest format:
///
/// ```toml
/// [tools]
/// rustc = "compile"   # stub path, relative to the manifest
/// javac = false       # explicitly absent
/// ```
#[derive(Debug, Clone, Default)]
pub struct ManifestResolver {
    tools: BTreeMap<String, PathBuf>,
}

impl ManifestResolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_tool(mut self, name: impl Into<String>, path: impl Into<PathBuf>) -> Self {
        self.tools.insert(name.into(), path.into());
        self
    }

    pub fn without_tool(mut self, name: &str) -> Self {
        self.tools.remove(name);
        self
    }

    pub fn tools(&self) -> impl Iterator<Item = (&str, &Path)> {
        self.tools.iter().map(|(k, v)| (k.as_str(), v.as_path()))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let file: ManifestFile = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut tools = BTreeMap::new();
        for (name, entry) in file.tools {
            match entry {
                ManifestEntry::Path(p) => {
                    let path = Path::new(&p);
                    let path = if path.is_absolute() {
                        path.to_path_buf()
                    } else {
                        base.join(path)
                    };
                    tools.insert(name, path);
                }
                ManifestEntry::Flag(false) => {}
                ManifestEntry::Flag(true) => {
                    return Err(format!("tool `{name}`: use a stub path or false, not true"));
                }
            }
        }
        Ok(ManifestResolver { tools })
    }

    pub fn load(path: &Path) -> Result<Self, ResolverError> {
        let text = std::fs::read_to_string(path).map_err(|source| ResolverError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let base = std::fs::canonicalize(base).unwrap_or_else(|_| base.to_path_buf());
        Self::parse(&text, &base).map_err(|message| ResolverError::Invalid {
            path: path.to_path_buf(),
            message,
        })
    }
}

impl ToolResolver for ManifestResolver {
    fn resolve(&self, tool: &str) -> Option<PathBuf> {
        self.tools.get(tool).cloned()
    }
}

/// The manifest named by [`TOOL_MANIFEST_ENV`] if set, else the search path.
pub fn resolver_from_env() -> Result<Box<dyn ToolResolver>, ResolverError> {
    match std::env::var_os(TOOL_MANIFEST_ENV) {
        Some(path) if !path.is_empty() => Ok(Box::new(ManifestResolver::load(Path::new(&path))?)),
        _ => Ok(Box::new(PathResolver)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolchainProbe {
    pub unit: String,
    pub required_tools: Vec<String>,
    pub available: bool,
    pub missing: Vec<String>,
}

impl ToolchainProbe {
    /// `missing tools: javac, java`
    pub fn skip_reason(&self) -> String {
        format!("missing tools: {}", self.missing.join(", "))
    }
}

pub fn probe_toolchain(
    unit: &str,
    required_tools: &[String],
    resolver: &dyn ToolResolver,
) -> ToolchainProbe {
    let missing: Vec<String> = required_tools
        .iter()
        .filter(|t| !resolver.is_available(t))
        .cloned()
        .collect();
    ToolchainProbe {
        unit: unit.to_string(),
        required_tools: required_tools.to_vec(),
        available: missing.is_empty(),
        missing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tools(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn java_absent() {
        let r = ManifestResolver::new().with_tool("rustc", "/stub/compile");
        let p = probe_toolchain("U04", &tools(&["javac", "java"]), &r);
        assert!(!p.available);
        assert_eq!(p.missing, ["javac", "java"]);
        assert_eq!(p.skip_reason(), "missing tools: javac, java");
    }

    #[test]
    fn nothing_required() {
        let p = probe_toolchain("U06", &[], &ManifestResolver::new());
        assert!(p.available);
        assert!(p.missing.is_empty());
    }

    #[test]
    fn all_present() {
        let r = ManifestResolver::new()
            .with_tool("tsc", "/s/noop")
            .with_tool("node", "/s/emit");
        let p = probe_toolchain("U05", &tools(&["tsc", "node"]), &r);
        assert!(p.available && p.missing.is_empty());
    }

    #[test]
    fn manifest_paths_are_relative_to_manifest() {
        let r = ManifestResolver::parse(
            "[tools]\ncc = \"compile\"\njava = false\n",
            Path::new("/stubs"),
        )
        .unwrap();
        assert_eq!(r.resolve("cc"), Some(PathBuf::from("/stubs/compile")));
        assert_eq!(r.resolve("java"), None);
        assert_eq!(r.resolve("go"), None);
        assert!(ManifestResolver::parse("[tools]\ncc = true\n", Path::new("/")).is_err());
    }

    #[test]
    fn removing_a_tool() {
        let r = ManifestResolver::new()
            .with_tool("go", "/s/emit")
            .without_tool("go");
        assert!(!r.is_available("go"));
    }
}
