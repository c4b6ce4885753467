//! Parallel execution of (test, engine) pairs with a per-run outcome cache.

use crate::engine::{self, Category, EngineSpec, Outcome, Registry};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

/// Outcomes keyed by test id, then engine name.
pub type OutcomeTable = BTreeMap<String, BTreeMap<String, Outcome>>;

/// One program to run: the test id it belongs to, its source and prelude.
#[derive(Debug, Clone)]
pub struct Job<'a> {
    pub id: &'a str,
    pub source: &'a str,
    pub prelude: Option<&'a str>,
}

pub struct Executor<'r> {
    registry: &'r Registry,
    pool: rayon::ThreadPool,
    cache: Mutex<HashMap<([u8; 32], String), Outcome>>,
}

impl<'r> Executor<'r> {
    /// `jobs == 0` means one worker per logical CPU.
    pub fn new(registry: &'r Registry, jobs: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
        Executor { registry, pool, cache: Mutex::new(HashMap::new()) }
    }

    pub fn registry(&self) -> &'r Registry {
        self.registry
    }

    fn key(source: &str, prelude: Option<&str>) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(prelude.unwrap_or("").as_bytes());
        h.update([0u8]);
        h.update(source.as_bytes());
        h.finalize().into()
    }

    /// Runs one program on one engine. Failing to start the engine becomes a
    /// CRASH outcome so a broken engine never aborts a whole run.
    pub fn outcome(&self, engine: &EngineSpec, source: &str, prelude: Option<&str>) -> Outcome {
        let key = (Self::key(source, prelude), engine.name.clone());
        if let Some(hit) = self.cache.lock().expect("cache").get(&key) {
            return hit.clone();
        }
        let outcome = match engine::run(engine, source, prelude) {
            Ok(o) => o,
            Err(e) => Outcome::new(engine.name.as_str(), Category::Crash).with_message(e.to_string()),
        };
        self.cache.lock().expect("cache").insert(key, outcome.clone());
        outcome
    }

    /// Runs every job on every listed engine. The result does not depend on
    /// scheduling order.
    pub fn run_all(&self, jobs: &[Job<'_>], engines: &[&EngineSpec]) -> OutcomeTable {
        let pairs: Vec<(&Job<'_>, &EngineSpec)> =
            jobs.iter().flat_map(|j| engines.iter().map(move |e| (j, *e))).collect();
        let results: Vec<(String, Outcome)> = self.pool.install(|| {
            pairs.par_iter().map(|(j, e)| (j.id.to_string(), self.outcome(e, j.source, j.prelude))).collect()
        });
        let mut table = OutcomeTable::new();
        for (id, o) in results {
            table.entry(id).or_default().insert(o.engine.clone(), o);
        }
        table
    }

    /// Runs every job on every registry engine.
    pub fn run_everywhere(&self, jobs: &[Job<'_>]) -> OutcomeTable {
        let engines: Vec<&EngineSpec> = self.registry.engines.iter().collect();
        self.run_all(jobs, &engines)
    }

    /// Runs `f` inside the worker pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}
