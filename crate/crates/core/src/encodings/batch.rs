use std::ops::Range;

use crate::domain::Instance;

/// A-priori batch slots: one per job, grouped by family in family order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchIndex {
    /// Family id of each slot; slot ids are the 1-based positions.
    pub families: Vec<u32>,
    /// 0-based slot positions of each family.
    pub by_family: Vec<Range<usize>>,
}

impl BatchIndex {
    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn slots_of(&self, family: u32) -> Range<usize> {
        self.by_family[family as usize - 1].clone()
    }
}

pub fn build_batch_index(instance: &Instance) -> BatchIndex {
    let mut families = Vec::with_capacity(instance.jobs.len());
    let mut by_family = Vec::with_capacity(instance.families.len());
    for (f, members) in instance.jobs_by_family().iter().enumerate() {
        let from = families.len();
        families.extend(std::iter::repeat_n(f as u32 + 1, members.len()));
        by_family.push(from..families.len());
    }
    BatchIndex {
        families,
        by_family,
    }
}
