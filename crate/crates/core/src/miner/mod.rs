//! Harvesting tests from issue trackers: attachments are taken as they are,
//! code pasted into the issue text is found paragraph by paragraph.

mod classify;
mod tracker;

pub use classify::{
    features, heuristic_probability, Classifier, ExternalScorer, Label, ParagraphLabel, Scorer, DEFAULT_THRESHOLD,
};
pub use tracker::{
    load_dump, BugTrackerClient, IssuesApiClient, RateLimiter, TrackerClient, BUG_TRACKER_KEY_ENV, ISSUES_TOKEN_ENV,
};

use crate::fuzz::{is_valid, FuzzError, ValidityChecker};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum MinerError {
    #[error("network failure: {0}")]
    NetworkFailure(String),
    #[error("authentication rejected by {0}")]
    AuthFailure(String),
    #[error("rate limited{}", .retry_after.map(|s| format!("; retry after {s}s")).unwrap_or_default())]
    RateLimited { retry_after: Option<u64> },
    #[error("external scorer failed: {0}")]
    ExternalScorerFailure(String),
    #[error("issue dump {path}: {message}")]
    Dump { path: PathBuf, message: String },
    #[error(transparent)]
    Checker(#[from] FuzzError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub filename: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueDocument {
    pub tracker: String,
    pub issue_id: String,
    pub body: String,
    #[serde(default)]
    pub attachments: Vec<Attachment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub text: String,
    /// Came from a fenced block.
    pub fenced: bool,
}

/// Splits at blank lines. A fenced block (```` ``` ````) is one paragraph
/// regardless of blank lines inside it, and its fence lines are dropped.
pub fn paragraphs(body: &str) -> Vec<Paragraph> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut fence: Option<Vec<&str>> = None;
    let flush = |current: &mut Vec<&str>, out: &mut Vec<Paragraph>| {
        if !current.is_empty() {
            out.push(Paragraph { text: current.join("\n"), fenced: false });
            current.clear();
        }
    };
    for line in body.lines() {
        let is_fence = line.trim_start().starts_with("```");
        match fence.as_mut() {
            Some(block) if is_fence => {
                out.push(Paragraph { text: block.join("\n"), fenced: true });
                fence = None;
            }
            Some(block) => block.push(line),
            None if is_fence => {
                flush(&mut current, &mut out);
                fence = Some(Vec::new());
            }
            None if line.trim().is_empty() => flush(&mut current, &mut out),
            None => current.push(line),
        }
    }
    if let Some(block) = fence {
        // Unclosed fence: everything after it is the block.
        out.push(Paragraph { text: block.join("\n"), fenced: true });
    }
    flush(&mut current, &mut out);
    out.retain(|p| !p.text.trim().is_empty());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub blocks: Vec<String>,
    /// Merged code blocks rejected by the validity check.
    pub dropped: usize,
    pub labels: Vec<ParagraphLabel>,
}

/// Classifies each paragraph, merges runs of CODE paragraphs and keeps the
/// merged blocks that parse.
pub fn extract_embedded_tests(
    issue: &IssueDocument,
    classifier: &Classifier,
    checker: &ValidityChecker,
) -> Result<Extraction, MinerError> {
    let labels: Vec<ParagraphLabel> =
        paragraphs(&issue.body).iter().map(|p| classifier.classify(&p.text)).collect::<Result<_, _>>()?;
    let mut runs: Vec<Vec<&str>> = Vec::new();
    let mut open = false;
    for l in &labels {
        match (l.label, open) {
            (Label::Code, true) => runs.last_mut().expect("open run").push(&l.text),
            (Label::Code, false) => {
                runs.push(vec![&l.text]);
                open = true;
            }
            (Label::NotCode, _) => open = false,
        }
    }
    let mut blocks = Vec::new();
    let mut dropped = 0;
    for run in runs {
        let mut block = run.join("\n\n");
        block.push('\n');
        if is_valid(&block, checker)? {
            blocks.push(block);
        } else {
            dropped += 1;
        }
    }
    Ok(Extraction { blocks, dropped, labels })
}

/// Counts of what was written to the corpus directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineSummary {
    pub issues: usize,
    pub attachments: usize,
    pub embedded: usize,
    pub dropped: usize,
}

/// Writes `.js` attachments and extracted blocks under
/// `<dir>/<tracker>/` as `<issue>-attachment-<name>` and `<issue>-embedded-<n>.js`,
/// a layout the corpus manifest can point a suite at.
pub fn write_tests(
    dir: &Path,
    issues: &[IssueDocument],
    classifier: &Classifier,
    checker: &ValidityChecker,
) -> Result<MineSummary, MinerError> {
    let mut summary = MineSummary { issues: issues.len(), ..MineSummary::default() };
    for issue in issues {
        let out = dir.join(sanitize(&issue.tracker));
        std::fs::create_dir_all(&out).map_err(|source| MinerError::Io { path: out.clone(), source })?;
        let id = sanitize(&issue.issue_id);
        for a in issue.attachments.iter().filter(|a| a.filename.ends_with(".js")) {
            let path = out.join(format!("{id}-attachment-{}", sanitize(&a.filename)));
            std::fs::write(&path, &a.bytes).map_err(|source| MinerError::Io { path, source })?;
            summary.attachments += 1;
        }
        let ex = extract_embedded_tests(issue, classifier, checker)?;
        summary.dropped += ex.dropped;
        for (n, block) in ex.blocks.iter().enumerate() {
            let path = out.join(format!("{id}-embedded-{n}.js"));
            std::fs::write(&path, block).map_err(|source| MinerError::Io { path, source })?;
            summary.embedded += 1;
        }
    }
    Ok(summary)
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}
