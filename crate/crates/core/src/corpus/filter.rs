//! The cleansing filters. Each returns the surviving corpus and a report whose
//! counts always add up to the input size.

use super::{Corpus, TestCase};
use crate::engine::{Category, EngineSpec, Outcome};
use crate::runner::{Executor, Job, OutcomeTable};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FilterStage {
    PassInParent,
    TypeInAll,
    NoFailInAll,
    Dedup,
}

impl FilterStage {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterStage::PassInParent => "pass-in-parent",
            FilterStage::TypeInAll => "type-in-all",
            FilterStage::NoFailInAll => "no-fail-in-all",
            FilterStage::Dedup => "dedup",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discard {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub stage: FilterStage,
    pub input: usize,
    pub kept: usize,
    pub discarded: Vec<Discard>,
    /// Candidate near-duplicate pairs `(a, b, similarity)`; dedup only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub near_duplicates: Vec<(String, String, f64)>,
}

impl FilterReport {
    pub(crate) fn new(stage: FilterStage, input: usize) -> Self {
        FilterReport { stage, input, kept: 0, discarded: Vec::new(), near_duplicates: Vec::new() }
    }
}

fn jobs<'a>(tests: &[&'a TestCase], preludes: &'a [Option<String>]) -> Vec<Job<'a>> {
    tests
        .iter()
        .zip(preludes)
        .map(|(t, p)| Job { id: t.id.as_str(), source: t.source.as_str(), prelude: p.as_deref() })
        .collect()
}

/// Runs every test of the corpus on every registry engine.
pub(crate) fn outcomes_everywhere(corpus: &Corpus, exec: &Executor<'_>) -> OutcomeTable {
    let tests: Vec<&TestCase> = corpus.tests.iter().collect();
    let preludes: Vec<Option<String>> = tests.iter().map(|t| corpus.prelude_for(t)).collect();
    exec.run_everywhere(&jobs(&tests, &preludes))
}

fn split(
    corpus: &Corpus,
    stage: FilterStage,
    mut verdict: impl FnMut(&TestCase) -> Option<String>,
) -> (Corpus, FilterReport) {
    let mut report = FilterReport::new(stage, corpus.len());
    let mut kept = Vec::new();
    for t in &corpus.tests {
        match verdict(t) {
            None => kept.push(t.clone()),
            Some(reason) => report.discarded.push(Discard { id: t.id.clone(), reason }),
        }
    }
    report.kept = kept.len();
    (corpus.with_tests(kept), report)
}

/// Drops tests that do not pass on the engine whose suite they come from.
/// Tests from engine-less suites are kept.
pub fn filter_pass_in_parent(corpus: &Corpus, exec: &Executor<'_>) -> (Corpus, FilterReport) {
    let registry = exec.registry();
    let with_parent: Vec<(&TestCase, &EngineSpec)> = corpus
        .tests
        .iter()
        .filter_map(|t| corpus.parent_engine(t).and_then(|p| registry.get(p)).map(|e| (t, e)))
        .collect();
    let preludes: Vec<Option<String>> = with_parent.iter().map(|(t, _)| corpus.prelude_for(t)).collect();
    let results: Vec<(String, Outcome)> = exec.install(|| {
        use rayon::prelude::*;
        with_parent
            .par_iter()
            .zip(preludes.par_iter())
            .map(|((t, e), p)| (t.id.clone(), exec.outcome(e, &t.source, p.as_deref())))
            .collect()
    });
    let parent_outcome: std::collections::BTreeMap<String, Outcome> = results.into_iter().collect();
    split(corpus, FilterStage::PassInParent, |t| {
        parent_outcome.get(&t.id).filter(|o| !o.is_pass()).map(|o| format!("fails in parent {}: {}", o.engine, o))
    })
}

fn is_type_availability_error(o: &Outcome) -> bool {
    o.category == Category::RuntimeError
        && matches!(o.exception_kind.as_deref(), Some("ReferenceError") | Some("TypeError"))
}

/// Drops tests that raise ReferenceError or TypeError on any engine.
pub fn filter_type_in_all(corpus: &Corpus, exec: &Executor<'_>) -> (Corpus, FilterReport) {
    let table = outcomes_everywhere(corpus, exec);
    split(corpus, FilterStage::TypeInAll, |t| {
        table.get(&t.id).and_then(|row| {
            row.values()
                .find(|o| is_type_availability_error(o))
                .map(|o| format!("{} on {}", o.exception_kind.as_deref().unwrap_or_default(), o.engine))
        })
    })
}

/// Keeps exactly the tests that pass on every engine.
pub fn filter_no_fail_in_all(corpus: &Corpus, exec: &Executor<'_>) -> (Corpus, FilterReport) {
    let table = outcomes_everywhere(corpus, exec);
    split(corpus, FilterStage::NoFailInAll, |t| {
        table.get(&t.id).and_then(|row| row.values().find(|o| !o.is_pass()).map(|o| format!("{} on {}", o, o.engine)))
    })
}
