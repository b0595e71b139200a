use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::demand::{DemandId, Pgt, PgtId};
use crate::network::{ComponentId, Path};
use crate::time::Nanos;

/// One packet generation attempt on one resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pga {
    pub pgt: PgtId,
    pub demand: DemandId,
    pub start: Nanos,
    pub end: Nanos,
}

/// Task data kept alongside the schedule for compilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTask {
    pub demand: DemandId,
    pub path: Path,
    pub duration: Nanos,
    pub minsep: Nanos,
}

/// Aligned per-resource PGA lists for one scheduling interval.
#[derive(Debug, Clone, Default)]
pub struct NetworkSchedule {
    pub interval: u64,
    pub version: u64,
    /// Per resource, PGAs sorted by start.
    resources: BTreeMap<ComponentId, Vec<Pga>>,
    /// Per task, sorted start times.
    by_pgt: HashMap<PgtId, Vec<Nanos>>,
    tasks: BTreeMap<PgtId, ScheduledTask>,
}

/// Inserts keeping `v` sorted by `key`; appending is the cheap case.
fn insert_sorted<T: Copy>(v: &mut Vec<T>, item: T, key: impl Fn(&T) -> Nanos) {
    let k = key(&item);
    if v.last().is_none_or(|last| key(last) < k) {
        v.push(item);
    } else {
        let i = v.partition_point(|x| key(x) < k);
        debug_assert!(v.get(i).is_none_or(|x| key(x) != k), "two PGAs start at {k}");
        v.insert(i, item);
    }
}

impl NetworkSchedule {
    pub fn new(interval: u64, version: u64) -> Self {
        NetworkSchedule { interval, version, ..Default::default() }
    }

    /// Adds a PGA for `pgt` at `start` on every resource of its path.
    pub fn add(&mut self, pgt: &Pgt, start: Nanos) {
        let pga = Pga { pgt: pgt.id, demand: pgt.demand, start, end: start + pgt.duration };
        for &r in pgt.resources() {
            insert_sorted(self.resources.entry(r).or_default(), pga, |p| p.start);
        }
        insert_sorted(self.by_pgt.entry(pgt.id).or_default(), start, |&s| s);
        self.tasks.entry(pgt.id).or_insert_with(|| ScheduledTask {
            demand: pgt.demand,
            path: pgt.path.clone(),
            duration: pgt.duration,
            minsep: pgt.minsep,
        });
    }

    pub fn resources(&self) -> impl Iterator<Item = (ComponentId, impl Iterator<Item = &Pga>)> {
        self.resources.iter().map(|(&r, v)| (r, v.iter()))
    }

    pub fn on(&self, resource: ComponentId) -> impl Iterator<Item = &Pga> {
        self.resources.get(&resource).into_iter().flatten()
    }

    pub fn tasks(&self) -> &BTreeMap<PgtId, ScheduledTask> {
        &self.tasks
    }

    /// Start times of the PGAs of one task.
    pub fn starts(&self, pgt: PgtId) -> impl Iterator<Item = Nanos> + '_ {
        self.by_pgt.get(&pgt).into_iter().flatten().copied()
    }

    pub fn count(&self, pgt: PgtId) -> usize {
        self.by_pgt.get(&pgt).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> BTreeMap<PgtId, usize> {
        self.by_pgt.iter().map(|(&k, v)| (k, v.len())).collect()
    }

    pub fn total_pgas(&self) -> usize {
        self.by_pgt.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_pgt.is_empty()
    }

    pub fn max_end(&self) -> Nanos {
        self.resources.values().filter_map(|v| v.last()).map(|p| p.end).max().unwrap_or(0)
    }

    /// Last PGA on `resource` starting at or before `t`.
    fn at_or_before(&self, resource: ComponentId, t: Nanos) -> (Option<&Pga>, Option<&Pga>) {
        let Some(v) = self.resources.get(&resource) else { return (None, None) };
        let i = v.partition_point(|p| p.start <= t);
        (i.checked_sub(1).map(|j| &v[j]), v.get(i))
    }

    /// Whether some PGA on `resource` covers time `t`.
    pub fn busy_at(&self, resource: ComponentId, t: Nanos) -> bool {
        self.at_or_before(resource, t).0.is_some_and(|p| p.end > t)
    }

    /// Whether `resource` has no PGA overlapping `[t, t + duration)`.
    pub fn free(&self, resource: ComponentId, t: Nanos, duration: Nanos) -> bool {
        let (before, after) = self.at_or_before(resource, t);
        before.is_none_or(|p| p.end <= t) && after.is_none_or(|p| p.start >= t + duration)
    }

    /// Earliest PGA end on `resource` strictly after `t`.
    pub fn next_end_after(&self, resource: ComponentId, t: Nanos) -> Option<Nanos> {
        let v = self.resources.get(&resource)?;
        v.get(v.partition_point(|p| p.end <= t)).map(|p| p.end)
    }

    /// End of the latest PGA of `pgt` overlapping `(t - minsep, t]`, if any.
    pub fn left_violation(&self, pgt: &Pgt, t: Nanos) -> Option<Nanos> {
        if pgt.minsep <= 0 {
            return None;
        }
        let starts = self.by_pgt.get(&pgt.id)?;
        let s = *starts.get(starts.partition_point(|&s| s <= t).checked_sub(1)?)?;
        let end = s + pgt.duration;
        (end > t - pgt.minsep).then_some(end)
    }

    /// Whether a later PGA of `pgt` starts less than `minsep` after a PGA at `t` would end.
    pub fn right_violation(&self, pgt: &Pgt, t: Nanos) -> bool {
        if pgt.minsep <= 0 {
            return false;
        }
        let Some(starts) = self.by_pgt.get(&pgt.id) else { return false };
        starts.get(starts.partition_point(|&s| s <= t - pgt.duration)).is_some_and(|&s| s < t + pgt.duration + pgt.minsep)
    }
}
