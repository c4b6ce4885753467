//! Test transplantation: every suite's tests on every engine but the suite's
//! own, collected into a (suite × engine) failure matrix, plus the human
//! triage labels attached to its entries.

use crate::corpus::{Corpus, TestCase};
use crate::engine::{EngineSpec, Outcome};
use crate::oracle::Warning;
use crate::runner::Executor;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub suite: String,
    pub engine: String,
    /// Sorted failing test ids.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FailureMatrix {
    pub suites: Vec<String>,
    pub engines: Vec<String>,
    /// One cell per non-parent (suite, engine) pair, in suite then engine order.
    pub cells: Vec<MatrixCell>,
    pub diagonal_skipped: Vec<(String, String)>,
    /// Outcome of every failing (test, engine) pair.
    #[serde(default)]
    pub outcomes: BTreeMap<String, BTreeMap<String, Outcome>>,
}

impl FailureMatrix {
    pub fn cell(&self, suite: &str, engine: &str) -> Option<&MatrixCell> {
        self.cells.iter().find(|c| c.suite == suite && c.engine == engine)
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures.len()).sum()
    }

    /// Number of distinct files failing on at least one engine.
    pub fn distinct_failing_tests(&self) -> usize {
        self.cells.iter().flat_map(|c| c.failures.iter()).collect::<BTreeSet<_>>().len()
    }

    pub fn contains(&self, test_id: &str, engine: &str) -> bool {
        self.cells
            .iter()
            .any(|c| c.engine == engine && c.failures.binary_search_by(|f| f.as_str().cmp(test_id)).is_ok())
    }

    pub fn row_total(&self, suite: &str) -> usize {
        self.cells.iter().filter(|c| c.suite == suite).map(|c| c.failures.len()).sum()
    }

    pub fn column_total(&self, engine: &str) -> usize {
        self.cells.iter().filter(|c| c.engine == engine).map(|c| c.failures.len()).sum()
    }
}

/// Runs each test on every engine other than its suite's parent.
pub fn run_matrix(corpus: &Corpus, exec: &Executor<'_>) -> FailureMatrix {
    let registry = exec.registry();
    let engines: Vec<&EngineSpec> = registry.engines.iter().collect();
    let suites: Vec<String> = corpus.suites.iter().map(|s| s.name.clone()).collect();

    let preludes: Vec<Option<String>> = corpus.tests.iter().map(|t| corpus.prelude_for(t)).collect();
    let mut pairs: Vec<(&TestCase, Option<&str>, &EngineSpec)> = Vec::new();
    for (t, p) in corpus.tests.iter().zip(&preludes) {
        let parent = corpus.parent_engine(t);
        for e in &engines {
            if Some(e.name.as_str()) != parent {
                pairs.push((t, p.as_deref(), e));
            }
        }
    }
    let results: Vec<(String, Outcome)> = exec.install(|| {
        use rayon::prelude::*;
        pairs.par_iter().map(|(t, p, e)| (t.id.clone(), exec.outcome(e, &t.source, *p))).collect()
    });

    let mut failing: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    let mut outcomes: BTreeMap<String, BTreeMap<String, Outcome>> = BTreeMap::new();
    for (id, o) in results {
        if o.is_pass() {
            continue;
        }
        let suite = corpus.get(&id).map(|t| t.origin_suite.clone()).unwrap_or_default();
        failing.entry((suite, o.engine.clone())).or_default().push(id.clone());
        outcomes.entry(id).or_default().insert(o.engine.clone(), o);
    }

    let mut cells = Vec::new();
    let mut diagonal_skipped = Vec::new();
    for s in &corpus.suites {
        for e in &engines {
            if s.parent_engine.as_deref() == Some(e.name.as_str()) {
                diagonal_skipped.push((s.name.clone(), e.name.clone()));
                continue;
            }
            let mut failures = failing.remove(&(s.name.clone(), e.name.clone())).unwrap_or_default();
            failures.sort();
            cells.push(MatrixCell { suite: s.name.clone(), engine: e.name.clone(), failures });
        }
    }
    FailureMatrix { suites, engines: registry.names().map(str::to_string).collect(), cells, diagonal_skipped, outcomes }
}

/// Union of the false/true-positive categories used when triaging
/// transplanted failures and fuzzing warnings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TriageCategory {
    UndefinedBehavior,
    TimeoutOme,
    NotImplemented,
    NonStandardElement,
    InvalidInput,
    ErrorMessageMismatch,
    Other,
    Duplicate,
    Bug,
}

impl TriageCategory {
    pub const ALL: [TriageCategory; 9] = [
        TriageCategory::UndefinedBehavior,
        TriageCategory::TimeoutOme,
        TriageCategory::NotImplemented,
        TriageCategory::NonStandardElement,
        TriageCategory::InvalidInput,
        TriageCategory::ErrorMessageMismatch,
        TriageCategory::Other,
        TriageCategory::Duplicate,
        TriageCategory::Bug,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TriageCategory::UndefinedBehavior => "UNDEFINED_BEHAVIOR",
            TriageCategory::TimeoutOme => "TIMEOUT_OME",
            TriageCategory::NotImplemented => "NOT_IMPLEMENTED",
            TriageCategory::NonStandardElement => "NON_STANDARD_ELEMENT",
            TriageCategory::InvalidInput => "INVALID_INPUT",
            TriageCategory::ErrorMessageMismatch => "ERROR_MESSAGE_MISMATCH",
            TriageCategory::Other => "OTHER",
            TriageCategory::Duplicate => "DUPLICATE",
            TriageCategory::Bug => "BUG",
        }
    }

    /// Whether the label marks a real engine defect.
    pub fn is_true_positive(self) -> bool {
        matches!(self, TriageCategory::Bug | TriageCategory::Duplicate)
    }
}

impl fmt::Display for TriageCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TriageCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace(['-', ' '], "_");
        TriageCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| format!("unknown triage category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriageLabel {
    pub test_id: String,
    pub engine: String,
    pub category: TriageCategory,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub author: String,
}

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error("no failure of {test_id:?} on engine {engine:?} to label")]
    UnknownEntry { test_id: String, engine: String },
    #[error("annotations file {path}, line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("annotations file {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedEntry {
    pub suite: String,
    pub engine: String,
    pub test_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<TriageCategory>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub author: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnnotatedReport {
    pub entries: Vec<AnnotatedEntry>,
    /// Labelled entries per category; every category present, zero included.
    pub distribution: BTreeMap<TriageCategory, usize>,
    pub unlabeled: usize,
}

fn zero_distribution() -> BTreeMap<TriageCategory, usize> {
    TriageCategory::ALL.into_iter().map(|c| (c, 0)).collect()
}

fn merge(mut entries: Vec<AnnotatedEntry>, labels: &[TriageLabel]) -> Result<AnnotatedReport, AnnotateError> {
    let index: BTreeMap<(String, String), usize> =
        entries.iter().enumerate().map(|(i, e)| ((e.test_id.clone(), e.engine.clone()), i)).collect();
    // Later labels for the same entry supersede earlier ones.
    for l in labels {
        let Some(&i) = index.get(&(l.test_id.clone(), l.engine.clone())) else {
            return Err(AnnotateError::UnknownEntry { test_id: l.test_id.clone(), engine: l.engine.clone() });
        };
        entries[i].category = Some(l.category);
        entries[i].note = l.note.clone();
        entries[i].author = l.author.clone();
    }
    let mut distribution = zero_distribution();
    let mut unlabeled = 0;
    for e in &entries {
        match e.category {
            Some(c) => *distribution.entry(c).or_default() += 1,
            None => unlabeled += 1,
        }
    }
    Ok(AnnotatedReport { entries, distribution, unlabeled })
}

/// Merges labels into the matrix entries.
pub fn annotate(matrix: &FailureMatrix, labels: &[TriageLabel]) -> Result<AnnotatedReport, AnnotateError> {
    let entries = matrix
        .cells
        .iter()
        .flat_map(|c| {
            c.failures.iter().map(|id| AnnotatedEntry {
                suite: c.suite.clone(),
                engine: c.engine.clone(),
                test_id: id.clone(),
                category: None,
                note: String::new(),
                author: String::new(),
            })
        })
        .collect();
    merge(entries, labels)
}

/// Merges labels into fuzzing warnings. A warning is addressed by its
/// reference and any engine in its outcome map.
pub fn annotate_warnings(warnings: &[Warning], labels: &[TriageLabel]) -> Result<AnnotatedReport, AnnotateError> {
    let mut entries: Vec<AnnotatedEntry> = Vec::new();
    for w in warnings {
        for engine in w.outcomes.keys() {
            entries.push(AnnotatedEntry {
                suite: w.group.clone(),
                engine: engine.clone(),
                test_id: w.mutant_ref.clone(),
                category: None,
                note: String::new(),
                author: String::new(),
            });
        }
    }
    let labelled: BTreeSet<(&str, &str)> = labels.iter().map(|l| (l.test_id.as_str(), l.engine.as_str())).collect();
    let report = merge(entries, labels)?;
    // Only labelled entries and one slot per unlabelled warning are interesting.
    let mut seen = BTreeSet::new();
    let entries: Vec<AnnotatedEntry> = report
        .entries
        .into_iter()
        .filter(|e| {
            labelled.contains(&(e.test_id.as_str(), e.engine.as_str()))
                || (!labelled.iter().any(|(t, _)| *t == e.test_id) && seen.insert(e.test_id.clone()))
        })
        .collect();
    let unlabeled = entries.iter().filter(|e| e.category.is_none()).count();
    Ok(AnnotatedReport { entries, distribution: report.distribution, unlabeled })
}

/// Reads a line-delimited JSON annotations file. A missing file is empty.
pub fn load_labels(path: &Path) -> Result<Vec<TriageLabel>, AnnotateError> {
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(AnnotateError::Io { path: path.display().to_string(), source }),
    };
    let mut labels = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| AnnotateError::Io { path: path.display().to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let label = serde_json::from_str(&line).map_err(|e| AnnotateError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

/// Appends labels; existing lines are never rewritten.
pub fn append_labels(path: &Path, labels: &[TriageLabel]) -> Result<(), AnnotateError> {
    let io = |source| AnnotateError::Io { path: path.display().to_string(), source };
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    for l in labels {
        let line = serde_json::to_string(l).expect("label serializes");
        writeln!(f, "{line}").map_err(io)?;
    }
    Ok(())
}
