#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use dagproof_core::harness::{HarnessOptions, ManifestResolver};
use tempfile::TempDir;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn bundle_root() -> PathBuf {
    fixtures().join("hello-world/proof-bundle")
}

pub fn stubs() -> PathBuf {
    fixtures().join("stubs")
}

pub fn stub(name: &str) -> PathBuf {
    stubs().join(name)
}

/// The hermetic manifest: every runtime tool stubbed except javac/java.
pub fn stub_resolver() -> ManifestResolver {
    ManifestResolver::load(&stubs().join("tools.toml")).expect("stub manifest loads")
}

pub fn options() -> HarnessOptions {
    HarnessOptions {
        timeout: std::time::Duration::from_secs(10),
        parallel: true,
    }
}

pub fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

/// A writable copy of the reference bundle.
pub fn bundle_copy() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("proof-bundle");
    copy_dir(&bundle_root(), &root);
    (dir, root)
}

pub fn edit(path: &Path, from: &str, to: &str) {
    let text = fs::read_to_string(path).unwrap();
    assert!(
        text.contains(from),
        "{} does not contain {from:?}",
        path.display()
    );
    fs::write(path, text.replacen(from, to, 1)).unwrap();
}
