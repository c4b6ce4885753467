//! End-to-end stages shared by the command line and the tests.

use crate::cluster::bucket;
use crate::conformance::{run_conformance, ConformanceError};
use crate::corpus::{self, dedup, Corpus, CorpusError, FilterReport, FilterStage, Manifest};
use crate::engine::{self, EngineError, Outcome, Registry};
use crate::fuzz::{self, ExternalFuzzer, FuzzError, Generation, Mutator, ValidityChecker};
use crate::miner::{self, Classifier, IssueDocument, MinerError};
use crate::oracle::{all_fail_mismatch, compare, Priority, Warning};
use crate::report::{FuzzSummary, Report, ReportError};
use crate::runner::{Executor, Job};
use crate::transplant::{self, AnnotateError, FailureMatrix};
use crate::triage::{self, ExternalReducer, ReduceError, Reduction, WarningIdentity};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Fuzz(#[from] FuzzError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Miner(#[from] MinerError),
    #[error(transparent)]
    Conformance(#[from] ConformanceError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Everything a run depends on besides the files it names.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub registry: PathBuf,
    pub manifest: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub rng_seed: u64,
    pub mutants_per_seed: usize,
    pub k_per_iteration: usize,
    /// Worker threads; 0 means one per logical CPU.
    pub jobs: usize,
    pub timeout: Option<Duration>,
    pub memory_limit: Option<u64>,
    pub report_all_fail_mismatch: bool,
    /// Collapse exact duplicate tests before filtering.
    pub dedup: bool,
    /// Seconds since the epoch stamped on the report and its warnings.
    pub timestamp: u64,
    pub external_fuzzer: Option<ExternalFuzzer>,
    /// Engine whose parse-only mode screens mutants; the bundled checker
    /// otherwise.
    pub validity_engine: Option<String>,
    pub validity_fallback: bool,
    /// Append-only JSONL file of triage labels.
    pub annotations: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(registry: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            registry: registry.into(),
            manifest: None,
            out_dir: out_dir.into(),
            rng_seed: 0,
            mutants_per_seed: fuzz::DEFAULT_MUTANTS,
            k_per_iteration: triage::DEFAULT_K,
            jobs: 0,
            timeout: None,
            memory_limit: None,
            report_all_fail_mismatch: false,
            dedup: false,
            timestamp: 0,
            external_fuzzer: None,
            validity_engine: None,
            validity_fallback: false,
            annotations: None,
        }
    }

    pub fn with_manifest(mut self, manifest: impl Into<PathBuf>) -> Self {
        self.manifest = Some(manifest.into());
        self
    }

    fn manifest_path(&self) -> Result<&Path, PipelineError> {
        self.manifest
            .as_deref()
            .ok_or_else(|| PipelineError::Usage("a corpus manifest is required (--manifest)".into()))
    }

    /// Registry with overrides applied, every engine probed.
    pub fn load_registry(&self) -> Result<Registry, PipelineError> {
        let mut reg = engine::load_registry(&self.registry)?;
        for e in &mut reg.engines {
            if let Some(t) = self.timeout {
                e.timeout = t;
            }
            if let Some(m) = self.memory_limit {
                e.memory_limit = m;
            }
        }
        Ok(reg)
    }

    pub fn load_manifest(&self, registry: &Registry) -> Result<Manifest, PipelineError> {
        let m = Manifest::load(self.manifest_path()?)?;
        m.check_parents(registry.names())?;
        Ok(m)
    }

    fn checker(&self, registry: &Registry) -> Result<ValidityChecker, PipelineError> {
        match &self.validity_engine {
            None => Ok(ValidityChecker::Bundled),
            Some(name) => {
                let spec = registry
                    .get(name)
                    .ok_or_else(|| PipelineError::Usage(format!("validity engine {name:?} is not in the registry")))?;
                Ok(ValidityChecker::Engine { spec: spec.clone(), fallback: self.validity_fallback })
            }
        }
    }

    fn mutator(&self) -> Mutator {
        self.external_fuzzer.clone().map_or(Mutator::Bundled, Mutator::External)
    }
}

fn base_report(cfg: &RunConfig, command: &str, registry: &Registry) -> Report {
    let mut r = Report::new(command, &registry.digest, registry.names().map(str::to_string).collect());
    r.timestamp = cfg.timestamp;
    r
}

/// The corpus after each cleansing stage.
#[derive(Debug, Clone)]
pub struct Stages {
    pub ingested: Corpus,
    pub pass_in_parent: Corpus,
    pub type_in_all: Corpus,
    pub no_fail_in_all: Corpus,
    pub reports: Vec<FilterReport>,
}

/// Ingest, optional dedup, then the filters up to and including `through`,
/// each on the previous stage's output. Skipped stages repeat their input.
pub fn filter_stages(
    cfg: &RunConfig,
    manifest: &Manifest,
    exec: &Executor<'_>,
    report: &mut Report,
    through: FilterStage,
) -> Result<Stages, PipelineError> {
    let mut ingested = corpus::ingest(manifest)?;
    report.corpus_digests.insert("ingest".into(), ingested.digest());
    let mut reports = Vec::new();
    if cfg.dedup {
        let (out, r) = dedup(&ingested);
        reports.push(r);
        ingested = out;
        report.corpus_digests.insert("dedup".into(), ingested.digest());
    }
    let (pip, r1) = corpus::filter_pass_in_parent(&ingested, exec);
    report.corpus_digests.insert("pass-in-parent".into(), pip.digest());
    let (tia, r2) = corpus::filter_type_in_all(&pip, exec);
    report.corpus_digests.insert("type-in-all".into(), tia.digest());
    reports.extend([r1, r2]);
    let nfa = if through >= FilterStage::NoFailInAll {
        let (nfa, r3) = corpus::filter_no_fail_in_all(&tia, exec);
        report.corpus_digests.insert("no-fail-in-all".into(), nfa.digest());
        reports.push(r3);
        nfa
    } else {
        tia.clone()
    };
    report.filter_reports = reports.clone();
    Ok(Stages { ingested, pass_in_parent: pip, type_in_all: tia, no_fail_in_all: nfa, reports })
}

fn finish_warnings(
    cfg: &RunConfig,
    report: &mut Report,
    table: &crate::runner::OutcomeTable,
) -> Result<(), PipelineError> {
    for (id, row) in table {
        if let Some(mut w) = compare(id, row) {
            w.created_at = cfg.timestamp;
            report.warnings.push(w);
        } else if cfg.report_all_fail_mismatch {
            report.info.extend(all_fail_mismatch(id, row));
        }
    }
    let lo: Vec<Warning> = report.warnings.iter().filter(|w| w.priority == Priority::Lo).cloned().collect();
    let hi: Vec<Warning> = report.warnings.iter().filter(|w| w.priority == Priority::Hi).cloned().collect();
    report.clusters = bucket(&lo).expect("only LO warnings are clustered");
    report.queue = triage::schedule(&hi, &report.clusters, cfg.k_per_iteration);
    Ok(())
}

fn apply_annotations_to_warnings(cfg: &RunConfig, report: &mut Report) -> Result<(), PipelineError> {
    if let Some(path) = &cfg.annotations {
        let labels = transplant::load_labels(path)?;
        let annotated = transplant::annotate_warnings(&report.warnings, &labels)?;
        report.annotations = annotated.entries.into_iter().filter(|e| e.category.is_some()).collect();
        report.annotation_distribution = annotated.distribution;
    }
    Ok(())
}

/// `corpus ingest`: reads the manifest and reports the ingested corpus.
pub fn ingest_only(cfg: &RunConfig) -> Result<(Report, Corpus), PipelineError> {
    let registry = engine::load_registry_unprobed(&cfg.registry)?;
    let manifest = cfg.load_manifest(&registry)?;
    let mut report = base_report(cfg, "corpus ingest", &registry);
    let mut c = corpus::ingest(&manifest)?;
    report.corpus_digests.insert("ingest".into(), c.digest());
    if cfg.dedup {
        let (out, r) = dedup(&c);
        report.filter_reports.push(r);
        c = out;
        report.corpus_digests.insert("dedup".into(), c.digest());
    }
    report.seal();
    Ok((report, c))
}

/// `corpus filter`.
pub fn filter(cfg: &RunConfig) -> Result<(Report, Stages), PipelineError> {
    let registry = cfg.load_registry()?;
    let manifest = cfg.load_manifest(&registry)?;
    let exec = Executor::new(&registry, cfg.jobs);
    let mut report = base_report(cfg, "corpus filter", &registry);
    let stages = filter_stages(cfg, &manifest, &exec, &mut report, FilterStage::NoFailInAll)?;
    report.seal();
    Ok((report, stages))
}

/// `transplant`: the type-in-all pool on every foreign engine.
pub fn transplant(cfg: &RunConfig) -> Result<(Report, FailureMatrix), PipelineError> {
    let registry = cfg.load_registry()?;
    let manifest = cfg.load_manifest(&registry)?;
    let exec = Executor::new(&registry, cfg.jobs);
    let mut report = base_report(cfg, "transplant", &registry);
    let stages = filter_stages(cfg, &manifest, &exec, &mut report, FilterStage::TypeInAll)?;
    let pool = &stages.type_in_all;
    let matrix = transplant::run_matrix(pool, &exec);
    let preludes: Vec<Option<String>> = pool.tests.iter().map(|t| pool.prelude_for(t)).collect();
    let jobs: Vec<Job<'_>> = pool
        .tests
        .iter()
        .zip(&preludes)
        .map(|(t, p)| Job { id: &t.id, source: &t.source, prelude: p.as_deref() })
        .collect();
    let table = exec.run_everywhere(&jobs);
    finish_warnings(cfg, &mut report, &table)?;
    if let Some(path) = &cfg.annotations {
        let labels = transplant::load_labels(path)?;
        let annotated = transplant::annotate(&matrix, &labels)?;
        report.annotations = annotated.entries.into_iter().filter(|e| e.category.is_some()).collect();
        report.annotation_distribution = annotated.distribution;
    }
    report.transplant_matrix = Some(matrix.clone());
    report.seal();
    Ok((report, matrix))
}

/// `fuzzdiff`: mutate every no-fail-in-all seed, run the mutants everywhere
/// and compare.
pub fn fuzzdiff(cfg: &RunConfig) -> Result<(Report, Vec<Generation>), PipelineError> {
    let registry = cfg.load_registry()?;
    let manifest = cfg.load_manifest(&registry)?;
    let checker = cfg.checker(&registry)?;
    let exec = Executor::new(&registry, cfg.jobs);
    let mut report = base_report(cfg, "fuzzdiff", &registry);
    report.rng_seed = Some(cfg.rng_seed);
    let stages = filter_stages(cfg, &manifest, &exec, &mut report, FilterStage::NoFailInAll)?;
    let seeds = &stages.no_fail_in_all;

    let mutator = cfg.mutator();
    let generations =
        exec.install(|| fuzz::generate_all(&seeds.tests, cfg.mutants_per_seed, cfg.rng_seed, &mutator, &checker))?;
    let mutants: Vec<&fuzz::Mutant> = generations.iter().flat_map(|g| g.mutants.iter()).collect();
    let owned: Vec<fuzz::Mutant> = mutants.iter().map(|m| (*m).clone()).collect();
    fuzz::persist(&cfg.out_dir.join("mutants"), &owned)?;

    let refs: Vec<String> = mutants.iter().map(|m| m.reference()).collect();
    let preludes: Vec<Option<String>> =
        mutants.iter().map(|m| seeds.get(&m.seed_id).and_then(|t| seeds.prelude_for(t))).collect();
    let jobs: Vec<Job<'_>> = mutants
        .iter()
        .zip(&refs)
        .zip(&preludes)
        .map(|((m, r), p)| Job { id: r, source: &m.source, prelude: p.as_deref() })
        .collect();
    let table = exec.run_everywhere(&jobs);
    finish_warnings(cfg, &mut report, &table)?;
    apply_annotations_to_warnings(cfg, &mut report)?;

    report.fuzz = Some(FuzzSummary {
        mutator: match &cfg.external_fuzzer {
            Some(f) => f.program.display().to_string(),
            None => "bundled".into(),
        },
        seeds: seeds.len(),
        mutants_per_seed: cfg.mutants_per_seed,
        mutants: mutants.len(),
        attempts: generations.iter().map(|g| g.attempts).sum(),
        budget_exhausted: generations.iter().filter(|g| g.budget_exhausted).map(|g| g.seed_id.clone()).collect(),
    });
    report.seal();
    Ok((report, generations))
}

/// `cluster`: re-buckets the LO warnings of an existing report.
pub fn recluster(mut report: Report, k: usize) -> Report {
    let lo: Vec<Warning> = report.warnings.iter().filter(|w| w.priority == Priority::Lo).cloned().collect();
    let hi: Vec<Warning> = report.warnings.iter().filter(|w| w.priority == Priority::Hi).cloned().collect();
    report.clusters = bucket(&lo).expect("only LO warnings are clustered");
    report.queue = triage::schedule(&hi, &report.clusters, k);
    report
}

fn run_candidate(exec: &Executor<'_>, text: &str, prelude: Option<&str>) -> Option<BTreeMap<String, Outcome>> {
    if text.trim().is_empty() {
        return None;
    }
    let job = Job { id: "candidate", source: text, prelude };
    exec.run_everywhere(std::slice::from_ref(&job)).remove("candidate")
}

fn initial_warning(exec: &Executor<'_>, source: &str, prelude: Option<&str>) -> Result<Warning, PipelineError> {
    let outcomes = run_candidate(exec, source, prelude).ok_or_else(|| PipelineError::Usage("input is empty".into()))?;
    compare("input", &outcomes)
        .ok_or_else(|| PipelineError::Usage("the engines agree on this input; there is no warning to preserve".into()))
}

/// The warning `source` raises, if any.
pub fn warning_for(cfg: &RunConfig, source: &str, prelude: Option<&str>) -> Result<Warning, PipelineError> {
    let registry = cfg.load_registry()?;
    initial_warning(&Executor::new(&registry, cfg.jobs), source, prelude)
}

/// `reduce`: minimizes `source` while it raises the same warning.
pub fn reduce(cfg: &RunConfig, source: &str, prelude: Option<&str>) -> Result<(Warning, Reduction), PipelineError> {
    let registry = cfg.load_registry()?;
    let exec = Executor::new(&registry, cfg.jobs);
    let warning = initial_warning(&exec, source, prelude)?;
    let identity = WarningIdentity::of(&warning);
    let reduction = triage::reduce(source, |candidate| {
        run_candidate(&exec, candidate, prelude).is_some_and(|o| identity.reproduced_by(&o))
    })?;
    Ok((warning, reduction))
}

/// `reduce` through an external reducer. `interesting` is the command the
/// reducer runs on each candidate file; the result is re-checked here.
pub fn reduce_external(
    cfg: &RunConfig,
    source: &str,
    prelude: Option<&str>,
    reducer: &ExternalReducer,
    interesting: &str,
) -> Result<(Warning, Reduction), PipelineError> {
    let registry = cfg.load_registry()?;
    let exec = Executor::new(&registry, cfg.jobs);
    let warning = initial_warning(&exec, source, prelude)?;
    let identity = WarningIdentity::of(&warning);
    let reduction = reducer.reduce(source, interesting, |candidate| {
        run_candidate(&exec, candidate, prelude).is_some_and(|o| identity.reproduced_by(&o))
    })?;
    Ok((warning, reduction))
}

/// Whether `source` still raises `warning` on the registry engines.
pub fn reproduces(
    cfg: &RunConfig,
    warning: &Warning,
    source: &str,
    prelude: Option<&str>,
) -> Result<bool, PipelineError> {
    let registry = cfg.load_registry()?;
    let exec = Executor::new(&registry, cfg.jobs);
    let identity = WarningIdentity::of(warning);
    Ok(run_candidate(&exec, source, prelude).is_some_and(|o| identity.reproduced_by(&o)))
}

/// `mine`: writes the tests found in `issues` under `dest`. The registry is
/// read only when an engine screens the extracted blocks.
pub fn mine(
    cfg: &RunConfig,
    issues: &[IssueDocument],
    classifier: &Classifier,
    dest: &Path,
) -> Result<Report, PipelineError> {
    let (mut report, checker) = match &cfg.validity_engine {
        Some(_) => {
            let registry = engine::load_registry_unprobed(&cfg.registry)?;
            (base_report(cfg, "mine", &registry), cfg.checker(&registry)?)
        }
        None => {
            let mut r = Report::new("mine", "", Vec::new());
            r.timestamp = cfg.timestamp;
            (r, ValidityChecker::Bundled)
        }
    };
    checker.ready()?;
    report.mine = Some(miner::write_tests(dest, issues, classifier, &checker)?);
    report.seal();
    Ok(report)
}

/// `conformance`: every registry engine on the suite.
pub fn conformance(cfg: &RunConfig, suite: &Path, repeats: usize) -> Result<Report, PipelineError> {
    let registry = cfg.load_registry()?;
    let exec = Executor::new(&registry, cfg.jobs);
    let mut report = base_report(cfg, "conformance", &registry);
    for e in &registry.engines {
        report.conformance.push(exec.install(|| run_conformance(e, suite, repeats))?);
    }
    report.seal();
    Ok(report)
}
