//! The run report: `report.json` for machines and `summary.md` for people.
//! Field names are a stable contract; see `docs/report-schema.md`.

use crate::cluster::Cluster;
use crate::conformance::ConformanceResult;
use crate::corpus::FilterReport;
use crate::miner::MineSummary;
use crate::oracle::{AllFailMismatch, Priority, Warning, MULTI_ENGINE_GROUP};
use crate::transplant::{AnnotatedEntry, FailureMatrix, TriageCategory};
use crate::triage::QueueItem;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.md";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    IoFailure { path: PathBuf, source: std::io::Error },
    #[error("cannot read report {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FuzzSummary {
    /// `bundled` or the external fuzzer's program name.
    pub mutator: String,
    pub seeds: usize,
    pub mutants_per_seed: usize,
    pub mutants: usize,
    pub attempts: usize,
    /// Seeds that ran out of attempts before producing every mutant.
    pub budget_exhausted: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub run_id: String,
    /// Seconds since the Unix epoch; 0 unless the run was given a clock.
    pub timestamp: u64,
    pub command: String,
    pub rng_seed: Option<u64>,
    pub registry_digest: String,
    pub engines: Vec<String>,
    /// Digest of the corpus entering each stage, keyed by stage name.
    pub corpus_digests: BTreeMap<String, String>,
    pub filter_reports: Vec<FilterReport>,
    pub transplant_matrix: Option<FailureMatrix>,
    pub fuzz: Option<FuzzSummary>,
    pub warnings: Vec<Warning>,
    pub clusters: Vec<Cluster>,
    pub queue: Vec<QueueItem>,
    pub annotations: Vec<AnnotatedEntry>,
    pub annotation_distribution: BTreeMap<TriageCategory, usize>,
    pub conformance: Vec<ConformanceResult>,
    pub mine: Option<MineSummary>,
    /// All-fail disagreements, present only when requested.
    pub info: Vec<AllFailMismatch>,
}

impl Report {
    pub fn new(command: &str, registry_digest: &str, engines: Vec<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            registry_digest: registry_digest.to_string(),
            engines,
            ..Report::default()
        }
    }

    /// Derives `run_id` from everything that determines the run's inputs.
    pub fn seal(&mut self) {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        h.update(self.registry_digest.as_bytes());
        for (k, v) in &self.corpus_digests {
            h.update(k.as_bytes());
            h.update(v.as_bytes());
        }
        h.update(self.rng_seed.unwrap_or_default().to_le_bytes());
        h.update(self.timestamp.to_le_bytes());
        self.run_id = crate::engine::hex(&h.finalize()[..8]);
    }

    pub fn hi_count(&self) -> usize {
        self.warnings.iter().filter(|w| w.priority == Priority::Hi).count()
    }

    pub fn lo_count(&self) -> usize {
        self.warnings.len() - self.hi_count()
    }

    /// Warnings of the given priority per group, every engine and `+1`
    /// present.
    pub fn per_group(&self, priority: Priority) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<String, usize> = self.engines.iter().map(|e| (e.clone(), 0)).collect();
        counts.insert(MULTI_ENGINE_GROUP.to_string(), 0);
        for w in self.warnings.iter().filter(|w| w.priority == priority) {
            *counts.entry(w.group.clone()).or_default() += 1;
        }
        counts
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Report, ReportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ReportError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        Report::from_json(&text).map_err(|e| ReportError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    /// Writes `report.json` and `summary.md` into `dir`.
    pub fn emit(&self, dir: &Path) -> Result<(PathBuf, PathBuf), ReportError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ReportError::IoFailure { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let json = dir.join(REPORT_FILE);
        std::fs::write(&json, self.to_json()).map_err(io(&json))?;
        let md = dir.join(SUMMARY_FILE);
        std::fs::write(&md, self.summary()).map_err(io(&md))?;
        Ok((json, md))
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Run {}\n", self.run_id);
        let _ = writeln!(s, "- command: `{}`", self.command);
        let _ =
            writeln!(s, "- engines: {}", if self.engines.is_empty() { "-".into() } else { self.engines.join(", ") });
        if let Some(seed) = self.rng_seed {
            let _ = writeln!(s, "- rng seed: {seed}");
        }
        let _ = writeln!(s, "- registry digest: `{}`", self.registry_digest);
        let _ = writeln!(s, "- warnings: {} ({} hi, {} lo)\n", self.warnings.len(), self.hi_count(), self.lo_count());

        s.push_str("## Corpus filters\n\n");
        s.push_str(&filter_table(&self.filter_reports));

        if let Some(m) = &self.transplant_matrix {
            s.push_str("\n## Transplantation failures\n\n");
            s.push_str(&matrix_table(m));
        }

        if let Some(f) = &self.fuzz {
            let _ = writeln!(
                s,
                "\n## Fuzzing\n\n{} seeds, {} mutants ({} per seed, {} attempts, mutator {}).",
                f.seeds, f.mutants, f.mutants_per_seed, f.attempts, f.mutator
            );
            if !f.budget_exhausted.is_empty() {
                let _ = writeln!(s, "Attempt budget exhausted for: {}.", f.budget_exhausted.join(", "));
            }
        }

        s.push_str("\n## Warnings per group\n\n");
        s.push_str(&group_table(self));

        s.push_str("\n## Clusters\n\n");
        if self.clusters.is_empty() {
            s.push_str("none\n");
        } else {
            s.push_str("| size | representative | group | signature |\n|---:|---|---|---|\n");
            for c in &self.clusters {
                let _ = writeln!(s, "| {} | {} | {} | `{}` |", c.size, c.representative, c.group, c.signature);
            }
        }

        s.push_str("\n## Inspection queue\n\n");
        if self.queue.is_empty() {
            s.push_str("empty\n");
        } else {
            for (i, q) in self.queue.iter().enumerate() {
                let _ = writeln!(s, "{}. [{}] {} ({}, {} warning(s))", i + 1, q.priority, q.id, q.group, q.size);
            }
        }

        s.push_str("\n## Annotations\n\n");
        s.push_str(&annotation_table(&self.annotation_distribution));

        if !self.conformance.is_empty() {
            s.push_str(
                "\n## Conformance\n\n| engine | mean | min | max | variance | runs |\n|---|---:|---:|---:|---:|---:|\n",
            );
            for c in &self.conformance {
                let pct = |v: Option<f64>| v.map_or("-".into(), |v| format!("{:.1}%", v * 100.0));
                let var = c.variance.map_or("-".into(), |v| format!("{v:.6}"));
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} |",
                    c.engine,
                    pct(c.mean),
                    pct(c.min),
                    pct(c.max),
                    var,
                    c.runs.len()
                );
            }
        }

        if let Some(m) = &self.mine {
            let _ = writeln!(
                s,
                "\n## Mining\n\n{} issues: {} attachments and {} embedded tests kept, {} code blocks dropped as unparsable.",
                m.issues, m.attachments, m.embedded, m.dropped
            );
        }

        if !self.info.is_empty() {
            let _ =
                writeln!(s, "\n## All-fail disagreements\n\n{} inputs fail everywhere, differently.", self.info.len());
        }
        s
    }
}

fn filter_table(reports: &[FilterReport]) -> String {
    let mut s = String::from("| stage | input | kept | discarded |\n|---|---:|---:|---:|\n");
    for r in reports {
        let _ = writeln!(s, "| {} | {} | {} | {} |", r.stage.as_str(), r.input, r.kept, r.discarded.len());
    }
    if reports.is_empty() {
        s.push_str("| - | 0 | 0 | 0 |\n");
    }
    s
}

/// The failure matrix as a Markdown table with row and column totals.
pub fn matrix_table(m: &FailureMatrix) -> String {
    let mut s = String::from("| suite |");
    for e in &m.engines {
        let _ = write!(s, " {e} |");
    }
    s.push_str(" total |\n|---|");
    s.push_str(&"---:|".repeat(m.engines.len() + 1));
    s.push('\n');
    for suite in &m.suites {
        let _ = write!(s, "| {suite} |");
        for e in &m.engines {
            match m.cell(suite, e) {
                Some(c) => {
                    let _ = write!(s, " {} |", c.failures.len());
                }
                None => s.push_str(" - |"),
            }
        }
        let _ = writeln!(s, " {} |", m.row_total(suite));
    }
    s.push_str("| total |");
    for e in &m.engines {
        let _ = write!(s, " {} |", m.column_total(e));
    }
    let _ = writeln!(s, " {} |", m.total_failures());
    let _ = writeln!(s, "\n{} distinct failing files.", m.distinct_failing_tests());
    s
}

fn group_table(r: &Report) -> String {
    let hi = r.per_group(Priority::Hi);
    let lo = r.per_group(Priority::Lo);
    let mut s = String::from("| priority |");
    for g in hi.keys() {
        let _ = write!(s, " {g} |");
    }
    s.push_str(" total |\n|---|");
    s.push_str(&"---:|".repeat(hi.len() + 1));
    s.push('\n');
    for (name, row) in [("hi", &hi), ("lo", &lo)] {
        let _ = write!(s, "| {name} |");
        for v in row.values() {
            let _ = write!(s, " {v} |");
        }
        let _ = writeln!(s, " {} |", row.values().sum::<usize>());
    }
    s
}

fn annotation_table(dist: &BTreeMap<TriageCategory, usize>) -> String {
    let mut s = String::from("| kind | category | count |\n|---|---|---:|\n");
    for c in TriageCategory::ALL {
        let kind = if c.is_true_positive() { "TP" } else { "FP" };
        let _ = writeln!(s, "| {kind} | {c} | {} |", dist.get(&c).copied().unwrap_or(0));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_round_trips() {
        let mut r = Report::new("fuzzdiff", "abc", vec!["a".into(), "b".into()]);
        r.seal();
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let summary = r.summary();
        assert!(summary.contains("| hi | 0 | 0 | 0 | 0 |"), "{summary}");
        assert!(summary.contains("| FP | UNDEFINED_BEHAVIOR | 0 |"));
    }

    #[test]
    fn run_id_depends_on_inputs() {
        let mut a = Report::new("x", "d", vec![]);
        let mut b = a.clone();
        b.rng_seed = Some(1);
        a.seal();
        b.seal();
        assert_ne!(a.run_id, b.run_id);
        assert_eq!(a.run_id.len(), 16);
    }
}
