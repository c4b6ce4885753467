#![allow(dead_code)]

use entente::mock;
use std::path::{Path, PathBuf};

pub const MOCK: &str = env!("CARGO_BIN_EXE_entente-mock");
pub const ENGINES: [&str; 4] = ["chakra", "jsc", "sm", "v8"];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().expect("fixtures directory")
}

/// Writes a registry of mock engines into `dir` and returns its path.
pub fn mock_registry(dir: &Path, names: &[&str]) -> PathBuf {
    let path = dir.join("registry.toml");
    std::fs::write(&path, mock::registry_toml(Path::new(MOCK), names)).unwrap();
    path
}

pub fn corpus_manifest() -> PathBuf {
    fixtures().join("corpus/manifest.toml")
}

/// Ids each filter should drop, as listed next to the fixture corpus.
pub fn expected_drops() -> std::collections::BTreeMap<String, Vec<String>> {
    let text = std::fs::read_to_string(fixtures().join("corpus/expected.toml")).unwrap();
    toml::from_str(&text).unwrap()
}
