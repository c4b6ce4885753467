//! Bucketing LO warnings by signature.
//!
//! A signature is the engine-sorted list of `(engine, exception kind,
//! normalized message)` triples. Passing engines contribute `(engine, "-",
//! "-")`; failures without an exception kind use their category name as the
//! kind so that, say, a crash and a timeout never share a bucket.

use crate::engine::Outcome;
use crate::oracle::{Priority, Warning};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

pub const CODE_PLACEHOLDER: &str = "⟨code⟩";
pub const NUM_PLACEHOLDER: &str = "⟨num⟩";
pub const LOC_PLACEHOLDER: &str = "⟨loc⟩";
const ABSENT: &str = "-";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ClusterError {
    #[error("warning {0:?} is HI; only LO warnings are clustered")]
    PriorityMismatch(String),
}

static LOCATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:[A-Za-z]:)?[\w./\\-]*\w\.[A-Za-z]\w*:\d+(?::\d+)?").expect("location regex"));
static NUMERAL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(?:0[xX][0-9a-fA-F]+|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\b").expect("numeral regex"));
static SPACES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").expect("space regex"));

/// Replaces quoted spans. A quote only opens a span when it is not preceded
/// by a letter or digit, so apostrophes inside words survive.
fn replace_code_spans(message: &str) -> String {
    let chars: Vec<char> = message.chars().collect();
    let mut out = String::with_capacity(message.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let opens = matches!(c, '\'' | '"' | '`') && (i == 0 || !chars[i - 1].is_alphanumeric());
        if opens {
            if let Some(len) = chars[i + 1..].iter().position(|&d| d == c) {
                out.push_str(CODE_PLACEHOLDER);
                i += len + 2;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    out
}

/// Erases the parts of an engine message that refer to the program rather
/// than to the failure: quoted code, file locations, numbers.
pub fn normalize_message(message: &str) -> String {
    let s = replace_code_spans(message);
    // Locations go before numerals so `file.js:3:10` is seen whole.
    let s = LOCATION.replace_all(&s, LOC_PLACEHOLDER);
    let s = NUMERAL.replace_all(&s, NUM_PLACEHOLDER);
    let s = SPACES.replace_all(&s, " ");
    s.trim().to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub engine: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature(pub Vec<Triple>);

impl fmt::Display for Signature {
    /// `[(engine, "kind", "message"), ...]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {:?}, {:?})", t.engine, t.kind, t.message)?;
        }
        f.write_str("]")
    }
}

fn triple(engine: &str, o: &Outcome) -> Triple {
    if o.is_pass() {
        return Triple { engine: engine.to_string(), kind: ABSENT.into(), message: ABSENT.into() };
    }
    let kind = o.exception_kind.clone().unwrap_or_else(|| o.category.as_str().to_string());
    let message =
        o.message.as_deref().map(normalize_message).filter(|m| !m.is_empty()).unwrap_or_else(|| ABSENT.into());
    Triple { engine: engine.to_string(), kind, message }
}

/// Signature of the outcome map; independent of map iteration order.
pub fn signature_of(outcomes: &BTreeMap<String, Outcome>) -> Signature {
    let mut triples: Vec<Triple> = outcomes.iter().map(|(e, o)| triple(e, o)).collect();
    triples.sort();
    Signature(triples)
}

pub fn signature(warning: &Warning) -> Result<Signature, ClusterError> {
    if warning.priority == Priority::Hi {
        return Err(ClusterError::PriorityMismatch(warning.mutant_ref.clone()));
    }
    Ok(signature_of(&warning.outcomes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub signature: Signature,
    pub size: usize,
    pub representative: String,
    /// Group of the representative warning.
    pub group: String,
    /// Sorted member references.
    pub members: Vec<String>,
}

/// Groups LO warnings by signature. Clusters are ordered by size descending,
/// then representative.
pub fn bucket(warnings: &[Warning]) -> Result<Vec<Cluster>, ClusterError> {
    let mut buckets: BTreeMap<Signature, Vec<&Warning>> = BTreeMap::new();
    for w in warnings {
        buckets.entry(signature(w)?).or_default().push(w);
    }
    let mut clusters: Vec<Cluster> = buckets
        .into_iter()
        .map(|(signature, mut ws)| {
            ws.sort_by(|a, b| a.mutant_ref.cmp(&b.mutant_ref));
            Cluster {
                signature,
                size: ws.len(),
                representative: ws[0].mutant_ref.clone(),
                group: ws[0].group.clone(),
                members: ws.iter().map(|w| w.mutant_ref.clone()).collect(),
            }
        })
        .collect();
    clusters.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.representative.cmp(&b.representative)));
    Ok(clusters)
}
