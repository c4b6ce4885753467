//! Getting warnings in front of a human: inspection order and input
//! minimization.

mod reduce;
mod schedule;

pub use reduce::{ddmin, reduce, ExternalReducer, ReduceError, Reduction};
pub use schedule::{schedule, InspectionQueue, QueueItem, DEFAULT_K};

use crate::cluster::{signature_of, Signature};
use crate::engine::{Category, Outcome};
use crate::oracle::{compare, Priority, Warning};
use std::collections::BTreeMap;

/// What a reduction must preserve: priority, group, each engine's category
/// and exception kind, and for LO warnings the signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarningIdentity {
    pub priority: Priority,
    pub group: String,
    pub shapes: BTreeMap<String, (Category, Option<String>)>,
    pub signature: Option<Signature>,
}

impl WarningIdentity {
    pub fn of(w: &Warning) -> Self {
        WarningIdentity {
            priority: w.priority,
            group: w.group.clone(),
            shapes: w.outcomes.iter().map(|(e, o)| (e.clone(), (o.category, o.exception_kind.clone()))).collect(),
            signature: (w.priority == Priority::Lo).then(|| signature_of(&w.outcomes)),
        }
    }

    /// Whether these outcomes raise the same warning.
    pub fn reproduced_by(&self, outcomes: &BTreeMap<String, Outcome>) -> bool {
        compare("", outcomes).is_some_and(|w| WarningIdentity::of(&w) == *self)
    }
}
