//! The differential oracle.
//!
//! A program is a discrepancy when at least one engine passes it and at least
//! one does not. All-pass and all-fail are both consistent. Discrepancies are
//! ranked `HI` when every failing engine failed only an assertion, `LO`
//! otherwise, and grouped by the single engine that behaves differently
//! (or `+1` when that engine is not unique).

use crate::engine::{Category, Outcome};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Group name for warnings where more than one engine deviates.
pub const MULTI_ENGINE_GROUP: &str = "+1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Priority {
    Hi,
    Lo,
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Priority::Hi => "hi",
            Priority::Lo => "lo",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    /// Mutant reference (`<seed id>#<generation>`) or test id.
    pub mutant_ref: String,
    pub outcomes: BTreeMap<String, Outcome>,
    pub priority: Priority,
    pub group: String,
    /// Seconds since the Unix epoch; the run's logical clock.
    pub created_at: u64,
}

/// Cross-engine failure with no passing engine and disagreeing failures.
/// Not a warning; surfaced only on request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllFailMismatch {
    pub mutant_ref: String,
    pub outcomes: BTreeMap<String, Outcome>,
}

pub fn is_discrepancy<'a>(outcomes: impl IntoIterator<Item = &'a Outcome>) -> bool {
    let (mut any_pass, mut any_fail) = (false, false);
    for o in outcomes {
        if o.is_pass() {
            any_pass = true;
        } else {
            any_fail = true;
        }
    }
    any_pass && any_fail
}

/// HI iff every non-passing outcome is an assertion failure.
pub fn priority_of<'a>(outcomes: impl IntoIterator<Item = &'a Outcome>) -> Priority {
    let all_assert = outcomes.into_iter().filter(|o| !o.is_pass()).all(|o| o.category == Category::AssertFail);
    if all_assert {
        Priority::Hi
    } else {
        Priority::Lo
    }
}

pub fn prioritize(warning: &Warning) -> Priority {
    priority_of(warning.outcomes.values())
}

/// The engine whose category differs from a category shared by all the
/// others, if exactly one such engine exists; otherwise `+1`.
pub fn affected_group(outcomes: &BTreeMap<String, Outcome>) -> String {
    let mut candidates = Vec::new();
    for (name, o) in outcomes {
        let mut others = outcomes.iter().filter(|(n, _)| *n != name).map(|(_, x)| x.category);
        let Some(first) = others.next() else { continue };
        if others.all(|c| c == first) && first != o.category {
            candidates.push(name.as_str());
        }
    }
    match candidates.as_slice() {
        [only] => (*only).to_string(),
        _ => MULTI_ENGINE_GROUP.to_string(),
    }
}

/// Returns a warning iff the outcomes contain both a pass and a non-pass.
pub fn compare(subject: &str, outcomes: &BTreeMap<String, Outcome>) -> Option<Warning> {
    if outcomes.len() < 2 || !is_discrepancy(outcomes.values()) {
        return None;
    }
    Some(Warning {
        mutant_ref: subject.to_string(),
        outcomes: outcomes.clone(),
        priority: priority_of(outcomes.values()),
        group: affected_group(outcomes),
        created_at: 0,
    })
}

/// All engines fail, but not in the same way.
pub fn all_fail_mismatch(subject: &str, outcomes: &BTreeMap<String, Outcome>) -> Option<AllFailMismatch> {
    if outcomes.len() < 2 || outcomes.values().any(Outcome::is_pass) {
        return None;
    }
    let shapes: BTreeSet<(Category, Option<&str>)> =
        outcomes.values().map(|o| (o.category, o.exception_kind.as_deref())).collect();
    (shapes.len() > 1).then(|| AllFailMismatch { mutant_ref: subject.to_string(), outcomes: outcomes.clone() })
}
