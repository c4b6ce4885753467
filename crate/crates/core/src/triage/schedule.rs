use crate::cluster::Cluster;
use crate::oracle::{Priority, Warning};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

/// Warnings inspected per group per visit.
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueItem {
    /// Warning reference; for LO, the cluster representative.
    pub id: String,
    pub priority: Priority,
    pub group: String,
    /// Warnings the item stands for (1 for HI).
    pub size: usize,
}

/// Groups drained `k` items at a time, cycling over group names in order.
#[derive(Debug, Clone)]
pub struct InspectionQueue {
    groups: BTreeMap<String, VecDeque<QueueItem>>,
    k: usize,
    cursor: usize,
    taken: usize,
}

impl InspectionQueue {
    /// Panics if `k` is zero.
    pub fn new(items: impl IntoIterator<Item = QueueItem>, k: usize) -> Self {
        assert!(k >= 1, "k must be at least 1");
        let mut sorted: BTreeMap<String, Vec<QueueItem>> = BTreeMap::new();
        for item in items {
            sorted.entry(item.group.clone()).or_default().push(item);
        }
        let groups = sorted
            .into_iter()
            .map(|(g, mut v)| {
                v.sort_by(|a, b| a.id.cmp(&b.id));
                (g, v.into())
            })
            .collect();
        InspectionQueue { groups, k, cursor: 0, taken: 0 }
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Iterator for InspectionQueue {
    type Item = QueueItem;

    fn next(&mut self) -> Option<QueueItem> {
        let n = self.groups.len();
        for _ in 0..=n {
            let (_, q) = self.groups.iter_mut().nth(self.cursor % n.max(1))?;
            if self.taken < self.k {
                if let Some(item) = q.pop_front() {
                    self.taken += 1;
                    return Some(item);
                }
            }
            self.cursor = (self.cursor + 1) % n;
            self.taken = 0;
        }
        None
    }
}

/// HI warnings first, then one representative per LO cluster, each tier in
/// round-robin over its groups.
pub fn schedule(hi: &[Warning], lo: &[Cluster], k: usize) -> Vec<QueueItem> {
    let hi_items = hi.iter().filter(|w| w.priority == Priority::Hi).map(|w| QueueItem {
        id: w.mutant_ref.clone(),
        priority: Priority::Hi,
        group: w.group.clone(),
        size: 1,
    });
    let lo_items = lo.iter().map(|c| QueueItem {
        id: c.representative.clone(),
        priority: Priority::Lo,
        group: c.group.clone(),
        size: c.size,
    });
    InspectionQueue::new(hi_items, k).chain(InspectionQueue::new(lo_items, k)).collect()
}
