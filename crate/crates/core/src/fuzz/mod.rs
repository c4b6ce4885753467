//! Mutational fuzzing of seed tests.
//!
//! Each mutant is one operator applied to the seed. The random stream for
//! mutant `g` of a seed is derived from `(seed id, rng seed, g)` alone, so a
//! mutant can be regenerated without replaying its predecessors.

mod ops;

pub use ops::{apply, mutate_once, Operator};

use crate::corpus::TestCase;
use crate::engine::{self, Category, EngineSpec, Mode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::Command;

/// Mutants per seed.
pub const DEFAULT_MUTANTS: usize = 20;
/// Attempts allowed per requested mutant.
pub const ATTEMPTS_PER_MUTANT: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum FuzzError {
    #[error("validity checker engine {0:?} is unavailable and no fallback is configured")]
    CheckerUnavailable(String),
    #[error("external fuzzer {program}: {detail}")]
    ExternalFuzzer { program: String, detail: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    pub seed_id: String,
    pub generation_index: usize,
    pub source: String,
    pub operator: Operator,
    pub rng_seed: u64,
}

impl Mutant {
    /// `<seed id>#<generation index>`.
    pub fn reference(&self) -> String {
        format!("{}#{}", self.seed_id, self.generation_index)
    }
}

/// Decides whether a candidate is syntactically valid.
#[derive(Debug, Clone)]
pub enum ValidityChecker {
    /// The built-in tokenizer and bracket matcher.
    Bundled,
    /// An engine's parse-only mode, optionally falling back to the bundled
    /// checker when the engine cannot be started.
    Engine { spec: EngineSpec, fallback: bool },
}

impl ValidityChecker {
    /// Fails up front when the engine is missing and there is no fallback.
    pub fn ready(&self) -> Result<(), FuzzError> {
        match self {
            ValidityChecker::Engine { spec, fallback: false } if !engine_available(spec) => {
                Err(FuzzError::CheckerUnavailable(spec.name.clone()))
            }
            _ => Ok(()),
        }
    }
}

fn engine_available(spec: &EngineSpec) -> bool {
    spec.parse_only_flags.is_some() && engine::resolve_binary(spec).is_ok()
}

pub fn is_valid(candidate: &str, checker: &ValidityChecker) -> Result<bool, FuzzError> {
    match checker {
        ValidityChecker::Bundled => Ok(crate::js::check_syntax(candidate).is_ok()),
        ValidityChecker::Engine { spec, fallback } => {
            if candidate.trim().is_empty() {
                return Ok(false);
            }
            match engine::execute_mode(spec, candidate, None, Mode::ParseOnly) {
                Ok(raw) => Ok(engine::classify(spec, &raw).category != Category::SyntaxError),
                Err(_) if *fallback => Ok(crate::js::check_syntax(candidate).is_ok()),
                Err(_) => Err(FuzzError::CheckerUnavailable(spec.name.clone())),
            }
        }
    }
}

/// A fuzzer run as `program [args] <in> <out> <rng_seed>`: it reads the seed
/// from `in` and writes one candidate to `out`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalFuzzer {
    pub program: PathBuf,
    #[serde(default)]
    pub args: Vec<String>,
}

impl ExternalFuzzer {
    pub fn mutate(&self, source: &str, rng_seed: u64) -> Result<String, FuzzError> {
        let fail = |detail: String| FuzzError::ExternalFuzzer { program: self.program.display().to_string(), detail };
        let dir = tempfile::tempdir().map_err(|e| fail(e.to_string()))?;
        let input = dir.path().join("in.js");
        let output = dir.path().join("out.js");
        std::fs::write(&input, source).map_err(|e| fail(e.to_string()))?;
        let status = Command::new(&self.program)
            .args(&self.args)
            .arg(&input)
            .arg(&output)
            .arg(rng_seed.to_string())
            .stdin(std::process::Stdio::null())
            .stdout(std::process::Stdio::null())
            .stderr(std::process::Stdio::null())
            .status()
            .map_err(|e| fail(e.to_string()))?;
        if !status.success() {
            return Err(fail(format!("exited with {status}")));
        }
        let bytes = std::fs::read(&output).map_err(|e| fail(format!("no output: {e}")))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }
}

#[derive(Debug, Clone, Default)]
pub enum Mutator {
    #[default]
    Bundled,
    External(ExternalFuzzer),
}

/// Mutants of one seed plus the attempt accounting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generation {
    pub seed_id: String,
    pub mutants: Vec<Mutant>,
    pub requested: usize,
    pub attempts: usize,
    pub budget: usize,
    pub budget_exhausted: bool,
}

/// The random stream for mutant `index` of `seed_id`.
pub fn mutant_rng(seed_id: &str, rng_seed: u64, index: usize) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed_id.as_bytes());
    h.update([0]);
    h.update(rng_seed.to_le_bytes());
    h.update((index as u64).to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn candidate(mutator: &Mutator, source: &str, rng: &mut ChaCha8Rng) -> Result<(Operator, String), FuzzError> {
    match mutator {
        Mutator::Bundled => Ok(mutate_once(source, rng)),
        Mutator::External(ext) => Ok((Operator::External, ext.mutate(source, rng.next_u64())?)),
    }
}

/// Collects `n` valid mutants of `seed`, or fewer if `ATTEMPTS_PER_MUTANT * n`
/// candidates were tried first. Candidates equal to the seed are not
/// mutants and are retried.
pub fn generate_valid(
    seed: &TestCase,
    n: usize,
    rng_seed: u64,
    mutator: &Mutator,
    checker: &ValidityChecker,
) -> Result<Generation, FuzzError> {
    let budget = ATTEMPTS_PER_MUTANT * n;
    let mut gen = Generation {
        seed_id: seed.id.clone(),
        mutants: Vec::with_capacity(n),
        requested: n,
        attempts: 0,
        budget,
        budget_exhausted: false,
    };
    'outer: for index in 0..n {
        let mut rng = mutant_rng(&seed.id, rng_seed, index);
        loop {
            if gen.attempts == budget {
                gen.budget_exhausted = true;
                break 'outer;
            }
            gen.attempts += 1;
            let (operator, source) = candidate(mutator, &seed.source, &mut rng)?;
            if source != seed.source && is_valid(&source, checker)? {
                gen.mutants.push(Mutant {
                    seed_id: seed.id.clone(),
                    generation_index: index,
                    source,
                    operator,
                    rng_seed,
                });
                break;
            }
        }
    }
    Ok(gen)
}

/// `generate_valid` over many seeds in parallel; output in seed order.
pub fn generate_all(
    seeds: &[TestCase],
    n: usize,
    rng_seed: u64,
    mutator: &Mutator,
    checker: &ValidityChecker,
) -> Result<Vec<Generation>, FuzzError> {
    checker.ready()?;
    seeds.par_iter().map(|s| generate_valid(s, n, rng_seed, mutator, checker)).collect()
}

#[derive(Serialize)]
struct Sidecar<'a> {
    seed_id: &'a str,
    generation_index: usize,
    operator: Operator,
    rng_seed: u64,
    sha256: String,
}

/// Writes `<dir>/<seed id>/<index>.js` with a `<index>.json` metadata sidecar.
pub fn persist(dir: &Path, mutants: &[Mutant]) -> Result<Vec<PathBuf>, FuzzError> {
    let mut written = Vec::with_capacity(mutants.len());
    for m in mutants {
        let seed_dir = dir.join(&m.seed_id);
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| FuzzError::Io { path, source }
        };
        std::fs::create_dir_all(&seed_dir).map_err(io(&seed_dir))?;
        let js = seed_dir.join(format!("{}.js", m.generation_index));
        std::fs::write(&js, &m.source).map_err(io(&js))?;
        let sidecar = Sidecar {
            seed_id: &m.seed_id,
            generation_index: m.generation_index,
            operator: m.operator,
            rng_seed: m.rng_seed,
            sha256: engine::hex(&Sha256::digest(m.source.as_bytes())),
        };
        let meta = seed_dir.join(format!("{}.json", m.generation_index));
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        std::fs::write(&meta, text + "\n").map_err(io(&meta))?;
        written.push(js);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn seed(source: &str) -> TestCase {
        TestCase {
            id: "s/seed.js".into(),
            origin_suite: "s".into(),
            source: source.into(),
            needs_prelude: false,
            tags: BTreeSet::new(),
        }
    }

    const TEN_LINES: &str = "var a = 1;\nvar b = 2;\nvar s = \"str\";\nfunction f(x) {\n  return x + 1;\n}\n\
                             if (a === b) {\n  a = f(b);\n}\nvar arr = [1, 2, 3].map(f);\n";

    #[test]
    fn validity_examples() {
        assert!(is_valid("var a = 1;", &ValidityChecker::Bundled).unwrap());
        assert!(!is_valid("var a = ;", &ValidityChecker::Bundled).unwrap());
        assert!(!is_valid("var s = \"abc;", &ValidityChecker::Bundled).unwrap());
    }

    #[test]
    fn twenty_valid_distinct_from_seed() {
        let g = generate_valid(&seed(TEN_LINES), 20, 7, &Mutator::Bundled, &ValidityChecker::Bundled).unwrap();
        assert_eq!(g.mutants.len(), 20);
        assert!(!g.budget_exhausted);
        for (i, m) in g.mutants.iter().enumerate() {
            assert_eq!(m.generation_index, i);
            assert_ne!(m.source, TEN_LINES);
            assert!(is_valid(&m.source, &ValidityChecker::Bundled).unwrap());
        }
    }

    #[test]
    fn replayable_per_index() {
        let a = generate_valid(&seed(TEN_LINES), 20, 99, &Mutator::Bundled, &ValidityChecker::Bundled).unwrap();
        let b = generate_valid(&seed(TEN_LINES), 5, 99, &Mutator::Bundled, &ValidityChecker::Bundled).unwrap();
        assert_eq!(&a.mutants[..5], &b.mutants[..]);
        let c = generate_valid(&seed(TEN_LINES), 20, 100, &Mutator::Bundled, &ValidityChecker::Bundled).unwrap();
        assert_ne!(a.mutants, c.mutants);
    }

    #[test]
    fn unmutable_seed_exhausts_budget() {
        let g =
            generate_valid(&seed("// only a comment\n"), 3, 1, &Mutator::Bundled, &ValidityChecker::Bundled).unwrap();
        assert!(g.budget_exhausted);
        assert_eq!(g.attempts, 150);
        assert!(g.mutants.is_empty());
    }

    #[test]
    fn missing_checker_engine() {
        let spec = EngineSpec::new("ghost", "/nonexistent/ghost-engine");
        let strict = ValidityChecker::Engine { spec: spec.clone(), fallback: false };
        assert!(matches!(strict.ready(), Err(FuzzError::CheckerUnavailable(_))));
        let mut spec = spec;
        spec.parse_only_flags = Some(vec![]);
        let lenient = ValidityChecker::Engine { spec, fallback: true };
        assert!(is_valid("var a = 1;", &lenient).unwrap());
        assert!(!is_valid("var a = ;", &lenient).unwrap());
    }

    #[test]
    fn persisted_layout() {
        let d = tempfile::tempdir().unwrap();
        let g = generate_valid(&seed(TEN_LINES), 2, 3, &Mutator::Bundled, &ValidityChecker::Bundled).unwrap();
        persist(d.path(), &g.mutants).unwrap();
        let js = d.path().join("s/seed.js/1.js");
        assert_eq!(std::fs::read_to_string(&js).unwrap(), g.mutants[1].source);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d.path().join("s/seed.js/1.json")).unwrap()).unwrap();
        assert_eq!(meta["generation_index"], 1);
        assert_eq!(meta["rng_seed"], 3);
    }
}
