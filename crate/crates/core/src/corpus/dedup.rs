use super::filter::{Discard, FilterReport, FilterStage};
use super::Corpus;
use crate::js::tokenize;
use std::collections::{BTreeMap, BTreeSet};

/// Token-set Jaccard similarity at or above which two tests are reported as
/// near-duplicates.
pub const NEAR_DUPLICATE_THRESHOLD: f64 = 0.95;

fn normalized_bytes(source: &str) -> String {
    let mut out: String = source.lines().map(str::trim_end).collect::<Vec<_>>().join("\n");
    out.truncate(out.trim_end().len());
    out
}

/// Distinct tokens with comments dropped. Falls back to whitespace splitting
/// for text the tokenizer rejects.
pub fn token_set(source: &str) -> BTreeSet<String> {
    match tokenize(source) {
        Ok(tokens) => tokens.into_iter().map(|t| t.text.to_string()).collect(),
        Err(_) => source.split_whitespace().map(str::to_string).collect(),
    }
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Pairs `(a, b, similarity)` with `a < b` and similarity at or above the
/// threshold, sorted by ids.
pub fn near_duplicate_pairs(corpus: &Corpus, threshold: f64) -> Vec<(String, String, f64)> {
    let mut sets: Vec<(&str, BTreeSet<String>)> =
        corpus.tests.iter().map(|t| (t.id.as_str(), token_set(&t.source))).collect();
    sets.sort_by(|x, y| x.1.len().cmp(&y.1.len()).then(x.0.cmp(y.0)));
    let mut pairs = Vec::new();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            // |A∩B|/|A∪B| <= |A|/|B| for |A| <= |B|.
            let (small, large) = (sets[i].1.len() as f64, sets[j].1.len() as f64);
            if large > 0.0 && small / large < threshold {
                break;
            }
            let s = jaccard(&sets[i].1, &sets[j].1);
            if s >= threshold {
                let (a, b) = if sets[i].0 < sets[j].0 { (sets[i].0, sets[j].0) } else { (sets[j].0, sets[i].0) };
                pairs.push((a.to_string(), b.to_string(), s));
            }
        }
    }
    pairs.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
    pairs
}

/// Collapses exact duplicates (modulo trailing whitespace) onto the smallest
/// id and reports near-duplicates without removing them.
pub fn dedup(corpus: &Corpus) -> (Corpus, FilterReport) {
    let mut report = FilterReport::new(FilterStage::Dedup, corpus.len());
    let mut first: BTreeMap<String, &str> = BTreeMap::new();
    let mut kept = Vec::new();
    // Tests are sorted by id, so the first occurrence is the smallest id.
    for t in &corpus.tests {
        let key = normalized_bytes(&t.source);
        match first.get(&key) {
            Some(original) => {
                report.discarded.push(Discard { id: t.id.clone(), reason: format!("exact duplicate of {original}") })
            }
            None => {
                first.insert(key, t.id.as_str());
                kept.push(t.clone());
            }
        }
    }
    report.kept = kept.len();
    let out = corpus.with_tests(kept);
    report.near_duplicates = near_duplicate_pairs(&out, NEAR_DUPLICATE_THRESHOLD);
    (out, report)
}
