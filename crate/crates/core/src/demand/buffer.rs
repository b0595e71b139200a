use std::collections::{BTreeSet, VecDeque};

use super::types::{Pgt, PgtId};

/// PGT alternatives of one demand, best first.
pub type TaskAlternatives = Vec<Pgt>;

/// FIFO of registered demands waiting for admission.
#[derive(Debug, Clone, Default)]
pub struct TaskIntakeBuffer {
    entries: VecDeque<TaskAlternatives>,
}

impl TaskIntakeBuffer {
    pub fn push(&mut self, alternatives: TaskAlternatives) {
        debug_assert!(!alternatives.is_empty());
        self.entries.push_back(alternatives);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Removes and returns up to `max` entries from the front (all if `None`).
    pub fn read_and_flush(&mut self, max: Option<usize>) -> Vec<TaskAlternatives> {
        let n = max.map_or(self.entries.len(), |m| m.min(self.entries.len()));
        self.entries.drain(..n).collect()
    }
}

/// Termination requests; always read in full.
#[derive(Debug, Clone, Default)]
pub struct TerminationBuffer {
    entries: BTreeSet<PgtId>,
}

impl TerminationBuffer {
    pub fn push(&mut self, id: PgtId) {
        self.entries.insert(id);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn read_and_flush(&mut self) -> BTreeSet<PgtId> {
        std::mem::take(&mut self.entries)
    }
}
