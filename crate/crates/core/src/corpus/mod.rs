//! Seed tests: ingestion from suite directories, cleansing filters, dedup.

mod dedup;
mod filter;

pub use dedup::{dedup, jaccard, near_duplicate_pairs, token_set, NEAR_DUPLICATE_THRESHOLD};
pub use filter::{
    filter_no_fail_in_all, filter_pass_in_parent, filter_type_in_all, Discard, FilterReport, FilterStage,
};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("suite {suite:?}: directory {dir} does not exist")]
    MissingDirectory { suite: String, dir: PathBuf },
    #[error("manifest {location}: {message}")]
    ManifestParse { location: String, message: String },
    #[error("suite {suite:?} names parent engine {engine:?}, which is not in the registry")]
    UnknownParentEngine { suite: String, engine: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    /// `<suite>/<relative path>`.
    pub id: String,
    pub origin_suite: String,
    pub source: String,
    pub needs_prelude: bool,
    #[serde(default)]
    pub tags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub dir: PathBuf,
    /// Engine whose regression suite this is; `None` for engine-less suites
    /// such as conformance or third-party suites.
    #[serde(default)]
    pub parent_engine: Option<String>,
    #[serde(default)]
    pub needs_prelude: bool,
    /// Extra shim files prepended after the prelude for this suite's tests.
    #[serde(default)]
    pub shims: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub path: PathBuf,
    pub prelude: Option<PathBuf>,
    pub suites: Vec<Suite>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    #[serde(default)]
    prelude: Option<PathBuf>,
    #[serde(default)]
    suite: Vec<Suite>,
}

impl Manifest {
    pub fn parse(text: &str, origin: &Path) -> Result<Manifest, CorpusError> {
        let file: ManifestFile = toml::from_str(text).map_err(|e| CorpusError::ManifestParse {
            location: match e.span() {
                Some(s) => format!("{}:{}", origin.display(), text[..s.start].matches('\n').count() + 1),
                None => origin.display().to_string(),
            },
            message: e.message().to_string(),
        })?;
        let base = origin.parent().unwrap_or(Path::new("."));
        let mut names = BTreeSet::new();
        let mut suites = file.suite;
        for s in &mut suites {
            if !names.insert(s.name.clone()) {
                return Err(CorpusError::ManifestParse {
                    location: origin.display().to_string(),
                    message: format!("suite {:?} listed twice", s.name),
                });
            }
            s.dir = base.join(&s.dir);
            for shim in &mut s.shims {
                *shim = base.join(&*shim);
            }
        }
        Ok(Manifest { path: origin.to_path_buf(), prelude: file.prelude.map(|p| base.join(p)), suites })
    }

    pub fn load(path: &Path) -> Result<Manifest, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.into(), source })?;
        Manifest::parse(&text, path)
    }

    pub fn suite(&self, name: &str) -> Option<&Suite> {
        self.suites.iter().find(|s| s.name == name)
    }

    /// Every named parent engine must exist in the registry.
    pub fn check_parents<'a>(&self, engine_names: impl IntoIterator<Item = &'a str>) -> Result<(), CorpusError> {
        let known: BTreeSet<&str> = engine_names.into_iter().collect();
        for s in &self.suites {
            if let Some(p) = &s.parent_engine {
                if !known.contains(p.as_str()) {
                    return Err(CorpusError::UnknownParentEngine { suite: s.name.clone(), engine: p.clone() });
                }
            }
        }
        Ok(())
    }
}

/// A set of tests plus what is needed to run them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    /// Sorted by id.
    pub tests: Vec<TestCase>,
    pub suites: Vec<Suite>,
    /// Text prepended to tests that need the harness prelude.
    pub prelude: Option<String>,
    /// Concatenated shim text per suite.
    pub shims: BTreeMap<String, String>,
    /// Non-fatal ingestion notes, e.g. empty suites.
    pub warnings: Vec<String>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TestCase> {
        self.tests.binary_search_by(|t| t.id.as_str().cmp(id)).ok().map(|i| &self.tests[i])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.tests.iter().map(|t| t.id.as_str())
    }

    pub fn suite(&self, name: &str) -> Option<&Suite> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn parent_engine(&self, test: &TestCase) -> Option<&str> {
        self.suite(&test.origin_suite).and_then(|s| s.parent_engine.as_deref())
    }

    /// Prelude plus suite shims for tests that need them.
    pub fn prelude_for(&self, test: &TestCase) -> Option<String> {
        if !test.needs_prelude {
            return None;
        }
        let mut text = self.prelude.clone().unwrap_or_default();
        if let Some(shim) = self.shims.get(&test.origin_suite) {
            if !text.is_empty() && !text.ends_with('\n') {
                text.push('\n');
            }
            text.push_str(shim);
        }
        (!text.is_empty()).then_some(text)
    }

    /// Same context, different tests.
    pub fn with_tests(&self, tests: Vec<TestCase>) -> Corpus {
        Corpus { tests, ..self.clone() }
    }

    /// sha256 over ids and sources, in id order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tests {
            h.update(t.id.as_bytes());
            h.update([0]);
            h.update(t.source.as_bytes());
            h.update([0]);
        }
        crate::engine::hex(&h.finalize())
    }
}

fn collect_js(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CorpusError> {
    let entries = std::fs::read_dir(dir).map_err(|source| CorpusError::Io { path: dir.into(), source })?;
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io { path: dir.into(), source })?;
        let path = entry.path();
        let ty = entry.file_type().map_err(|source| CorpusError::Io { path: path.clone(), source })?;
        if ty.is_dir() {
            collect_js(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "js") {
            out.push(path);
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    let bytes = std::fs::read(path).map_err(|source| CorpusError::Io { path: path.into(), source })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Reads every `.js` file of every suite in the manifest.
pub fn ingest(manifest: &Manifest) -> Result<Corpus, CorpusError> {
    let mut tests = Vec::new();
    let mut warnings = Vec::new();
    let mut shims = BTreeMap::new();
    for suite in &manifest.suites {
        if !suite.dir.is_dir() {
            return Err(CorpusError::MissingDirectory { suite: suite.name.clone(), dir: suite.dir.clone() });
        }
        let mut files = Vec::new();
        collect_js(&suite.dir, &mut files)?;
        let before = tests.len();
        for path in files {
            let rel = path.strip_prefix(&suite.dir).unwrap_or(&path);
            let rel: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            let source = read_text(&path)?;
            let id = format!("{}/{}", suite.name, rel.join("/"));
            if source.trim().is_empty() {
                warnings.push(format!("{id}: empty file skipped"));
                continue;
            }
            let tags = rel[..rel.len() - 1].iter().cloned().collect();
            tests.push(TestCase {
                id,
                origin_suite: suite.name.clone(),
                source,
                needs_prelude: suite.needs_prelude,
                tags,
            });
        }
        if tests.len() == before {
            warnings.push(format!("suite {:?} is empty", suite.name));
        }
        if !suite.shims.is_empty() {
            let mut text = String::new();
            for shim in &suite.shims {
                text.push_str(&read_text(shim)?);
                if !text.ends_with('\n') {
                    text.push('\n');
                }
            }
            shims.insert(suite.name.clone(), text);
        }
    }
    tests.sort_by(|a, b| a.id.cmp(&b.id));
    let prelude = manifest.prelude.as_deref().map(read_text).transpose()?;
    Ok(Corpus { tests, suites: manifest.suites.clone(), prelude, shims, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, rel: &str, text: &str) {
        let p = dir.join(rel);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, text).unwrap();
    }

    #[test]
    fn ingest_sorted_ids_and_suite_prefix() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "a/z.js", "var z;");
        write(d.path(), "a/sub/m.js", "var m;");
        write(d.path(), "a/b.js", "var b;");
        write(d.path(), "a/notes.txt", "ignored");
        write(d.path(), "b/b.js", "var b;");
        let m = Manifest::parse(
            "[[suite]]\nname = \"A\"\ndir = \"a\"\nparent_engine = \"v8\"\n[[suite]]\nname = \"B\"\ndir = \"b\"\n",
            &d.path().join("manifest.toml"),
        )
        .unwrap();
        let c = ingest(&m).unwrap();
        assert_eq!(c.ids().collect::<Vec<_>>(), ["A/b.js", "A/sub/m.js", "A/z.js", "B/b.js"]);
        assert!(c.get("A/sub/m.js").unwrap().tags.contains("sub"));
        assert_eq!(c.parent_engine(c.get("A/b.js").unwrap()), Some("v8"));
        assert_eq!(c.parent_engine(c.get("B/b.js").unwrap()), None);
    }

    #[test]
    fn missing_directory_and_empty_suite() {
        let d = tempfile::tempdir().unwrap();
        std::fs::create_dir(d.path().join("empty")).unwrap();
        let m = Manifest::parse("[[suite]]\nname = \"E\"\ndir = \"empty\"\n", &d.path().join("m.toml")).unwrap();
        let c = ingest(&m).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.warnings.len(), 1);
        let m = Manifest::parse("[[suite]]\nname = \"X\"\ndir = \"nope\"\n", &d.path().join("m.toml")).unwrap();
        assert!(matches!(ingest(&m), Err(CorpusError::MissingDirectory { suite, .. }) if suite == "X"));
    }

    #[test]
    fn prelude_and_shims() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "prelude.js", "function assert(c) {}");
        write(d.path(), "shim.js", "function drainJobQueue() {}");
        write(d.path(), "s/t.js", "assert(1);");
        write(d.path(), "u/t.js", "1;");
        let m = Manifest::parse(
            "prelude = \"prelude.js\"\n[[suite]]\nname = \"s\"\ndir = \"s\"\nneeds_prelude = true\nshims = [\"shim.js\"]\n\
             [[suite]]\nname = \"u\"\ndir = \"u\"\n",
            &d.path().join("m.toml"),
        )
        .unwrap();
        let c = ingest(&m).unwrap();
        let p = c.prelude_for(c.get("s/t.js").unwrap()).unwrap();
        assert!(p.starts_with("function assert(c) {}\n"));
        assert!(p.contains("drainJobQueue"));
        assert_eq!(c.prelude_for(c.get("u/t.js").unwrap()), None);
    }

    #[test]
    fn unknown_parent() {
        let m =
            Manifest::parse("[[suite]]\nname = \"s\"\ndir = \"s\"\nparent_engine = \"ghost\"\n", Path::new("m.toml"))
                .unwrap();
        assert!(matches!(m.check_parents(["v8"]), Err(CorpusError::UnknownParentEngine { .. })));
    }
}
