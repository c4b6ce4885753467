//! Code/not-code paragraph classification.

use super::MinerError;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::LazyLock;

pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Code,
    NotCode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParagraphLabel {
    pub text: String,
    pub probability_code: f64,
    pub label: Label,
}

/// A program that reads a paragraph on stdin and prints a probability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalScorer {
    pub program: PathBuf,
    #[serde(default)]
    pub args: Vec<String>,
}

impl ExternalScorer {
    pub fn score(&self, text: &str) -> Result<f64, MinerError> {
        let fail = |detail: String| MinerError::ExternalScorerFailure(format!("{}: {detail}", self.program.display()));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| fail(e.to_string()))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let text = text.to_string();
        let writer = std::thread::spawn(move || stdin.write_all(text.as_bytes()));
        let out = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        let _ = writer.join();
        if !out.status.success() {
            return Err(fail(format!("exited with {}", out.status)));
        }
        let printed = String::from_utf8_lossy(&out.stdout);
        let p: f64 = printed.trim().parse().map_err(|_| fail(format!("not a probability: {:?}", printed.trim())))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(fail(format!("probability {p} outside [0, 1]")));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub enum Scorer {
    #[default]
    Heuristic,
    External(ExternalScorer),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub scorer: Scorer,
    pub threshold: f64,
}

impl Default for Classifier {
    fn default() -> Self {
        Classifier { scorer: Scorer::Heuristic, threshold: DEFAULT_THRESHOLD }
    }
}

impl Classifier {
    pub fn classify(&self, text: &str) -> Result<ParagraphLabel, MinerError> {
        let p = if text.trim().is_empty() {
            0.0
        } else {
            match &self.scorer {
                Scorer::Heuristic => heuristic_probability(text),
                Scorer::External(ext) => ext.score(text)?,
            }
        };
        let label = if p >= self.threshold { Label::Code } else { Label::NotCode };
        Ok(ParagraphLabel { text: text.to_string(), probability_code: p, label })
    }
}

const CODE_WORDS: &[&str] = &[
    "var",
    "let",
    "const",
    "function",
    "return",
    "if",
    "else",
    "for",
    "while",
    "do",
    "new",
    "typeof",
    "instanceof",
    "class",
    "extends",
    "throw",
    "try",
    "catch",
    "finally",
    "switch",
    "case",
    "break",
    "continue",
    "delete",
    "void",
    "yield",
    "await",
    "async",
    "null",
    "undefined",
    "true",
    "false",
    "this",
    "print",
    "console",
    "assert",
    "assertEq",
    "Object",
    "Array",
    "Symbol",
    "Promise",
    "Proxy",
    "Reflect",
    "Math",
    "JSON",
    "String",
    "Number",
];

static WORD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*(\s*\()?").expect("word regex"));
static CAMEL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[a-z][A-Z]").expect("camel regex"));

/// Feature values in [0, 1], in the order of `WEIGHTS`.
pub fn features(text: &str) -> [f64; 6] {
    let visible = text.chars().filter(|c| !c.is_whitespace()).count().max(1) as f64;
    let symbols = text.chars().filter(|c| ";{}()[]=<>+*/&|!".contains(*c)).count() as f64;

    let lines: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.trim().is_empty()).collect();
    let line_ends = lines.iter().filter(|l| l.ends_with([';', '{', '}', ')', ']', ','])).count() as f64;
    let line_end = line_ends / lines.len().max(1) as f64;

    let mut words = 0usize;
    let mut keywords = 0usize;
    let mut code_idents = 0usize;
    let mut prose = 0usize;
    for m in WORD.captures_iter(text) {
        let full = m.get(0).expect("match");
        let word = full.as_str().trim_end_matches(|c: char| c == '(' || c.is_whitespace());
        let called = m.get(1).is_some();
        words += 1;
        if CODE_WORDS.contains(&word) {
            keywords += 1;
        } else if called || word.contains(['.', '_', '$']) || CAMEL.is_match(word) {
            code_idents += 1;
        } else if word.len() >= 2 && word.chars().all(|c| c.is_ascii_alphabetic()) {
            prose += 1;
        }
    }
    let w = words.max(1) as f64;

    let trimmed = text.trim();
    let sentence = trimmed.starts_with(|c: char| c.is_uppercase())
        && trimmed.ends_with(['.', '?', '!', ':'])
        && !trimmed.ends_with("..");
    [
        (symbols / visible).min(1.0),
        line_end,
        keywords as f64 / w,
        code_idents as f64 / w,
        prose as f64 / w,
        if sentence { 1.0 } else { 0.0 },
    ]
}

const BIAS: f64 = -2.0;
const WEIGHTS: [f64; 6] = [14.0, 2.5, 4.0, 3.0, -4.0, -1.5];

/// Logistic squashing of weighted symbol density, statement-like line
/// endings, keyword and identifier ratios, prose ratio and sentence shape.
pub fn heuristic_probability(text: &str) -> f64 {
    if text.trim().is_empty() {
        return 0.0;
    }
    let z = BIAS + features(text).iter().zip(WEIGHTS).map(|(f, w)| f * w).sum::<f64>();
    1.0 / (1.0 + (-z).exp())
}
