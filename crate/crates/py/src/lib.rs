//! Python bindings. Structured values cross the boundary as JSON text in the
//! report's own encoding.

use entente::cluster::normalize_message;
use entente::corpus::TestCase;
use entente::engine::Outcome;
use entente::fuzz::{self, Mutator, ValidityChecker};
use entente::miner::heuristic_probability;
use entente::oracle::compare;
use entente::pipeline::{self, RunConfig};
use entente::report::Report;
use entente::triage;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use std::collections::BTreeMap;

fn runtime(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn value(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Warning raised by a map of engine name to outcome, as JSON, or None.
#[pyfunction]
fn compare_outcomes(outcomes_json: &str) -> PyResult<Option<String>> {
    let outcomes: BTreeMap<String, Outcome> = serde_json::from_str(outcomes_json).map_err(value)?;
    compare("input", &outcomes).map(|w| serde_json::to_string(&w).map_err(runtime)).transpose()
}

/// Error message with code spans, locations and numbers replaced.
#[pyfunction]
fn normalize(message: &str) -> String {
    normalize_message(message)
}

/// Whether the bundled syntax check accepts `source`.
#[pyfunction]
fn is_valid(source: &str) -> PyResult<bool> {
    fuzz::is_valid(source, &ValidityChecker::Bundled).map_err(runtime)
}

/// `n` valid mutants of `source` as a JSON generation record.
#[pyfunction]
#[pyo3(signature = (source, n, rng_seed, seed_id = "input"))]
fn mutate(source: &str, n: usize, rng_seed: u64, seed_id: &str) -> PyResult<String> {
    let seed = TestCase {
        id: seed_id.to_string(),
        origin_suite: String::new(),
        source: source.to_string(),
        needs_prelude: false,
        tags: Default::default(),
    };
    let gen =
        fuzz::generate_valid(&seed, n, rng_seed, &Mutator::Bundled, &ValidityChecker::Bundled).map_err(runtime)?;
    serde_json::to_string(&gen).map_err(runtime)
}

/// Minimizes `source` while `predicate(candidate)` is true.
#[pyfunction]
fn reduce(source: &str, predicate: Bound<'_, PyAny>) -> PyResult<String> {
    let mut raised = None;
    let result = triage::reduce(source, |candidate| match predicate.call1((candidate,)).and_then(|r| r.is_truthy()) {
        Ok(b) => b,
        Err(e) => {
            raised.get_or_insert(e);
            false
        }
    });
    if let Some(e) = raised {
        return Err(e);
    }
    result.map(|r| r.source).map_err(value)
}

/// Probability that a paragraph of issue text is code.
#[pyfunction]
fn code_probability(text: &str) -> f64 {
    heuristic_probability(text)
}

/// Markdown summary of a `report.json`.
#[pyfunction]
fn summarize(report_path: &str) -> PyResult<String> {
    Report::load(report_path.as_ref()).map(|r| r.summary()).map_err(runtime)
}

fn config(registry: &str, manifest: &str, out: &str) -> RunConfig {
    RunConfig::new(registry, out).with_manifest(manifest)
}

/// Runs the transplantation stage and writes the report; returns its JSON.
#[pyfunction]
fn transplant(py: Python<'_>, registry: &str, manifest: &str, out: &str) -> PyResult<String> {
    let cfg = config(registry, manifest, out);
    let report = py.detach(|| pipeline::transplant(&cfg)).map_err(runtime)?.0;
    report.emit(&cfg.out_dir).map_err(runtime)?;
    Ok(report.to_json())
}

/// Runs the fuzzing stage and writes the report; returns its JSON.
#[pyfunction]
#[pyo3(signature = (registry, manifest, out, rng_seed = 0, mutants = fuzz::DEFAULT_MUTANTS))]
fn fuzzdiff(
    py: Python<'_>,
    registry: &str,
    manifest: &str,
    out: &str,
    rng_seed: u64,
    mutants: usize,
) -> PyResult<String> {
    let mut cfg = config(registry, manifest, out);
    cfg.rng_seed = rng_seed;
    cfg.mutants_per_seed = mutants;
    let report = py.detach(|| pipeline::fuzzdiff(&cfg)).map_err(runtime)?.0;
    report.emit(&cfg.out_dir).map_err(runtime)?;
    Ok(report.to_json())
}

/// Registry TOML for mock engines sharing `binary`.
#[pyfunction]
fn mock_registry(binary: &str, names: Vec<String>) -> String {
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    entente::mock::registry_toml(binary.as_ref(), &names)
}

#[pymodule]
#[pyo3(name = "entente")]
fn entente_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ASSERT_SENTINEL", entente::engine::ASSERT_SENTINEL)?;
    m.add_function(wrap_pyfunction!(compare_outcomes, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(is_valid, m)?)?;
    m.add_function(wrap_pyfunction!(mutate, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(code_probability, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(transplant, m)?)?;
    m.add_function(wrap_pyfunction!(fuzzdiff, m)?)?;
    m.add_function(wrap_pyfunction!(mock_registry, m)?)?;
    Ok(())
}
