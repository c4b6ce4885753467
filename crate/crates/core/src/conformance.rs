//! Conformance-suite runs in the layout of Test262: tests under `test/`,
//! shared harness files under `harness/`, and a YAML frontmatter block in
//! each test naming expected errors, includes and flags.

use crate::engine::{self, Category, EngineSpec, Outcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Back-to-back runs averaged per engine.
pub const DEFAULT_REPEATS: usize = 7;

const ASYNC_DONE: &str = "Test262:AsyncTestComplete";

#[derive(Debug, thiserror::Error)]
pub enum ConformanceError {
    #[error("conformance suite {0} contains no tests")]
    EmptySuite(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct Negative {
    pub phase: String,
    #[serde(rename = "type")]
    pub kind: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct Metadata {
    #[serde(default)]
    pub negative: Option<Negative>,
    #[serde(default)]
    pub includes: Vec<String>,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl Metadata {
    fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

/// The `/*--- … ---*/` block, if any.
pub fn parse_frontmatter(source: &str) -> Result<Metadata, String> {
    let Some(start) = source.find("/*---") else {
        return Ok(Metadata::default());
    };
    let Some(len) = source[start..].find("---*/") else {
        return Err("unterminated frontmatter".into());
    };
    let yaml = &source[start + 5..start + len];
    if yaml.trim().is_empty() {
        return Ok(Metadata::default());
    }
    serde_yaml::from_str(yaml).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceRun {
    pub engine: String,
    pub run_index: usize,
    pub total: usize,
    pub passed: usize,
    /// Absent when no test ran.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceResult {
    pub engine: String,
    pub suite: PathBuf,
    pub runs: Vec<ConformanceRun>,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Tests not run, with the reason.
    pub skipped: BTreeMap<String, String>,
    /// Tests failing in the first run.
    pub failing: Vec<String>,
}

#[derive(Debug, Clone)]
struct Prepared {
    id: String,
    source: String,
    prelude: Option<String>,
    meta: Metadata,
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), ConformanceError> {
    let io = |source| ConformanceError::Io { path: dir.to_path_buf(), source };
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_dir() {
            collect(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "js") && !path.to_string_lossy().contains("_FIXTURE") {
            out.push(path);
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, ConformanceError> {
    std::fs::read_to_string(path).map_err(|source| ConformanceError::Io { path: path.to_path_buf(), source })
}

struct Harness {
    dir: Option<PathBuf>,
    cache: BTreeMap<String, Option<String>>,
}

impl Harness {
    fn file(&mut self, name: &str) -> Option<String> {
        let dir = self.dir.as_ref()?;
        self.cache.entry(name.to_string()).or_insert_with(|| std::fs::read_to_string(dir.join(name)).ok()).clone()
    }
}

fn prepare(suite_dir: &Path) -> Result<(Vec<Prepared>, BTreeMap<String, String>), ConformanceError> {
    let test_dir = if suite_dir.join("test").is_dir() { suite_dir.join("test") } else { suite_dir.to_path_buf() };
    let harness_dir = suite_dir.join("harness");
    let mut harness = Harness { dir: harness_dir.is_dir().then_some(harness_dir.clone()), cache: BTreeMap::new() };
    let mut files = Vec::new();
    collect(&test_dir, &mut files)?;
    files.retain(|f| !f.starts_with(&harness_dir));
    files.sort();
    if files.is_empty() {
        return Err(ConformanceError::EmptySuite(suite_dir.to_path_buf()));
    }

    let mut tests = Vec::new();
    let mut skipped = BTreeMap::new();
    for path in files {
        let id = path.strip_prefix(&test_dir).unwrap_or(&path).to_string_lossy().replace('\\', "/");
        let source = read(&path)?;
        let meta = match parse_frontmatter(&source) {
            Ok(m) => m,
            Err(e) => {
                skipped.insert(id, format!("bad frontmatter: {e}"));
                continue;
            }
        };
        if meta.has_flag("module") {
            skipped.insert(id, "module tests are not supported".into());
            continue;
        }
        let mut prelude = String::new();
        if meta.has_flag("onlyStrict") {
            prelude.push_str("\"use strict\";\n");
        }
        if !meta.has_flag("raw") {
            let mut names = vec!["assert.js".to_string(), "sta.js".to_string()];
            if meta.has_flag("async") {
                names.push("doneprintHandle.js".into());
            }
            names.extend(meta.includes.iter().cloned());
            let mut missing = None;
            for n in &names {
                match harness.file(n) {
                    Some(text) => {
                        prelude.push_str(&text);
                        if !text.ends_with('\n') {
                            prelude.push('\n');
                        }
                    }
                    None if meta.includes.contains(n) && harness.dir.is_some() => missing = Some(n.clone()),
                    None => {}
                }
            }
            if let Some(n) = missing {
                skipped.insert(id, format!("missing include {n}"));
                continue;
            }
        }
        tests.push(Prepared { id, source, prelude: (!prelude.is_empty()).then_some(prelude), meta });
    }
    Ok((tests, skipped))
}

/// Whether an outcome meets the test's expectation.
pub fn passes(outcome: &Outcome, meta: &Metadata, stdout: Option<&str>) -> bool {
    match &meta.negative {
        Some(neg) => match outcome.category {
            Category::SyntaxError => neg.kind == "SyntaxError",
            Category::RuntimeError => outcome.exception_kind.as_deref() == Some(neg.kind.as_str()),
            _ => false,
        },
        None if meta.has_flag("async") => outcome.is_pass() && stdout.is_some_and(|s| s.contains(ASYNC_DONE)),
        None => outcome.is_pass(),
    }
}

fn run_one(engine: &EngineSpec, t: &Prepared) -> bool {
    match engine::execute(engine, &t.source, t.prelude.as_deref()) {
        Ok(raw) => {
            let outcome = engine::classify(engine, &raw);
            passes(&outcome, &t.meta, Some(&raw.stdout))
        }
        Err(_) => false,
    }
}

fn stats(ratios: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    if ratios.is_empty() {
        return (None, None, None, None);
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let variance = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (Some(mean), Some(variance), Some(min), Some(max))
}

/// Runs the suite `repeats` times on `engine`. Every repeat executes every
/// test afresh.
pub fn run_conformance(
    engine: &EngineSpec,
    suite_dir: &Path,
    repeats: usize,
) -> Result<ConformanceResult, ConformanceError> {
    let (tests, skipped) = prepare(suite_dir)?;
    let mut runs = Vec::with_capacity(repeats);
    let mut failing = Vec::new();
    for run_index in 0..repeats {
        let results: Vec<bool> = tests.par_iter().map(|t| run_one(engine, t)).collect();
        if run_index == 0 {
            failing = tests.iter().zip(&results).filter(|(_, ok)| !**ok).map(|(t, _)| t.id.clone()).collect();
        }
        let passed = results.iter().filter(|ok| **ok).count();
        let total = tests.len();
        runs.push(ConformanceRun {
            engine: engine.name.clone(),
            run_index,
            total,
            passed,
            ratio: (total > 0).then(|| passed as f64 / total as f64),
        });
    }
    let ratios: Vec<f64> = runs.iter().filter_map(|r| r.ratio).collect();
    let (mean, variance, min, max) = stats(&ratios);
    Ok(ConformanceResult {
        engine: engine.name.clone(),
        suite: suite_dir.to_path_buf(),
        runs,
        mean,
        variance,
        min,
        max,
        skipped,
        failing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frontmatter_fields() {
        let src =
            "/*---\ndescription: x\nnegative:\n  phase: parse\n  type: SyntaxError\nincludes: [compareArray.js]\n\
                   flags: [onlyStrict]\n---*/\nvar = ;\n";
        let m = parse_frontmatter(src).unwrap();
        assert_eq!(m.negative, Some(Negative { phase: "parse".into(), kind: "SyntaxError".into() }));
        assert_eq!(m.includes, ["compareArray.js"]);
        assert!(m.has_flag("onlyStrict"));
        assert_eq!(parse_frontmatter("1;").unwrap(), Metadata::default());
        assert!(parse_frontmatter("/*--- flags: [ ---*/").is_err());
    }

    #[test]
    fn negative_expectations() {
        let neg = |kind: &str| Metadata {
            negative: Some(Negative { phase: "runtime".into(), kind: kind.into() }),
            ..Metadata::default()
        };
        let type_error = Outcome::error("e", Category::RuntimeError, "TypeError", "x");
        assert!(passes(&type_error, &neg("TypeError"), None));
        assert!(!passes(&type_error, &neg("RangeError"), None));
        assert!(!passes(&Outcome::pass("e"), &neg("TypeError"), None));
        assert!(passes(&Outcome::new("e", Category::SyntaxError), &neg("SyntaxError"), None));
        assert!(passes(&Outcome::pass("e"), &Metadata::default(), None));
    }

    #[test]
    fn statistics() {
        let (mean, var, min, max) = stats(&[0.5, 1.0]);
        assert_eq!((mean, var, min, max), (Some(0.75), Some(0.0625), Some(0.5), Some(1.0)));
        assert_eq!(stats(&[]), (None, None, None, None));
    }
}
