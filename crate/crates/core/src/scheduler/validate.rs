use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::compile::{CompiledEntry, CompiledSchedule};
use crate::demand::{Pgt, PgtId};
use crate::network::ComponentId;
use crate::time::Nanos;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub resource: ComponentId,
    pub first: (PgtId, Nanos),
    pub second: (PgtId, Nanos),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinsepViolation {
    pub pgt: PgtId,
    pub first_start: Nanos,
    pub second_start: Nanos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub pgt: PgtId,
    pub scheduled: usize,
    pub required: u32,
}

/// Findings of [`validate_schedule`]. Empty lists mean the property holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub conflicts: Vec<Conflict>,
    pub minsep_violations: Vec<MinsepViolation>,
    pub shortfalls: Vec<Shortfall>,
    /// PGAs missing from some component of their task's path.
    pub misaligned: Vec<(PgtId, Nanos)>,
    /// PGAs whose length differs from the task's duration.
    pub bad_lengths: Vec<(PgtId, Nanos)>,
    /// PGAs referring to tasks outside the given set.
    pub unknown: Vec<PgtId>,
    pub min_start: Nanos,
    pub max_end: Nanos,
    pub within_interval: bool,
}

impl ScheduleReport {
    /// No conflicts, separations, alignment or length problems and within the interval.
    pub fn is_valid(&self) -> bool {
        self.conflicts.is_empty()
            && self.minsep_violations.is_empty()
            && self.misaligned.is_empty()
            && self.bad_lengths.is_empty()
            && self.unknown.is_empty()
            && self.within_interval
    }

    /// Valid and every task got at least its minimal allocation.
    pub fn is_fully_valid(&self) -> bool {
        self.is_valid() && self.shortfalls.is_empty()
    }
}

/// Checks a compiled schedule against the task set, using nothing from the
/// scheduler itself. `required` lists the tasks whose minimal allocation
/// must be met.
pub fn validate_schedule(schedule: &CompiledSchedule, tasks: &[Pgt], required: &BTreeSet<PgtId>, t_si: Nanos) -> ScheduleReport {
    let by_id: HashMap<PgtId, &Pgt> = tasks.iter().map(|t| (t.id, t)).collect();
    let endpoints: BTreeSet<ComponentId> = tasks.iter().flat_map(|t| [t.path.source(), t.path.target()]).collect();
    let mut report = ScheduleReport { within_interval: true, ..Default::default() };
    let mut starts: BTreeMap<PgtId, BTreeSet<Nanos>> = BTreeMap::new();
    let mut seen_on: HashMap<(PgtId, Nanos), BTreeSet<ComponentId>> = HashMap::new();
    let mut unknown = BTreeSet::new();
    let (mut min_start, mut max_end) = (Nanos::MAX, Nanos::MIN);

    for (&component, entries) in &schedule.components {
        for e in entries {
            min_start = min_start.min(e.start_ns);
            max_end = max_end.max(e.end_ns);
            starts.entry(e.pgt).or_default().insert(e.start_ns);
            seen_on.entry((e.pgt, e.start_ns)).or_default().insert(component);
            match by_id.get(&e.pgt) {
                None => {
                    unknown.insert(e.pgt);
                }
                Some(t) if e.end_ns - e.start_ns != t.duration => report.bad_lengths.push((e.pgt, e.start_ns)),
                _ => {}
            }
        }
        if !endpoints.contains(&component) {
            report.conflicts.extend(overlaps(component, entries));
        }
    }
    report.unknown = unknown.into_iter().collect();
    report.bad_lengths.sort();
    report.bad_lengths.dedup();

    for (id, s) in &starts {
        let Some(task) = by_id.get(id) else { continue };
        let list: Vec<Nanos> = s.iter().copied().collect();
        if task.minsep > 0 {
            for w in list.windows(2) {
                if w[1] - (w[0] + task.duration) < task.minsep {
                    report.minsep_violations.push(MinsepViolation { pgt: *id, first_start: w[0], second_start: w[1] });
                }
            }
        }
        for &start in &list {
            let on = &seen_on[&(*id, start)];
            if task.path.vertices().iter().any(|v| !on.contains(v)) {
                report.misaligned.push((*id, start));
            }
        }
    }
    for id in required {
        let scheduled = starts.get(id).map_or(0, BTreeSet::len);
        let need = by_id.get(id).map_or(0, |t| t.min_alloc);
        if scheduled < need as usize {
            report.shortfalls.push(Shortfall { pgt: *id, scheduled, required: need });
        }
    }
    if min_start == Nanos::MAX {
        (min_start, max_end) = (0, 0);
    }
    report.min_start = min_start;
    report.max_end = max_end;
    report.within_interval = min_start >= 0 && max_end <= t_si;
    report
}

/// Every overlapping pair of PGAs on one component.
fn overlaps(component: ComponentId, entries: &[CompiledEntry]) -> Vec<Conflict> {
    let mut sorted: Vec<&CompiledEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| (e.start_ns, e.end_ns, e.pgt));
    let mut out = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if b.start_ns >= a.end_ns {
                break;
            }
            out.push(Conflict { resource: component, first: (a.pgt, a.start_ns), second: (b.pgt, b.start_ns) });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandId;
    use crate::network::Path;

    fn pgt(id: u64, path: &[u32], duration: Nanos, minsep: Nanos, min_alloc: u32) -> Pgt {
        Pgt {
            id: PgtId(id),
            demand: DemandId(id),
            duration,
            p_packet: 0.5,
            min_alloc,
            path: Path(path.iter().map(|&c| ComponentId(c)).collect()),
            minsep,
            t_start: 0.0,
            t_expiry: 1.0,
        }
    }

    fn put(s: &mut CompiledSchedule, t: &Pgt, start: Nanos) {
        for &v in t.path.vertices() {
            s.components.entry(v).or_default().push(CompiledEntry { pgt: t.id, demand: t.demand, start_ns: start, end_ns: start + t.duration });
        }
    }

    #[test]
    fn overlap_on_shared_egi() {
        let a = pgt(1, &[10, 1, 11], 5, 0, 1);
        let b = pgt(2, &[12, 1, 13], 5, 0, 1);
        let mut s = CompiledSchedule::default();
        put(&mut s, &a, 0);
        put(&mut s, &b, 4);
        let r = validate_schedule(&s, &[a, b], &BTreeSet::new(), 100);
        assert_eq!(r.conflicts.len(), 1);
        assert_eq!(r.conflicts[0].resource, ComponentId(1));
        assert!(!r.is_valid());
    }

    #[test]
    fn separation_one_short() {
        let a = pgt(1, &[10, 1, 11], 2, 5, 2);
        let mut s = CompiledSchedule::default();
        put(&mut s, &a, 0);
        put(&mut s, &a, 6);
        let r = validate_schedule(&s, std::slice::from_ref(&a), &BTreeSet::from([a.id]), 100);
        assert_eq!(r.minsep_violations.len(), 1);
        assert!(r.shortfalls.is_empty());
    }

    #[test]
    fn empty_is_valid() {
        let r = validate_schedule(&CompiledSchedule::default(), &[], &BTreeSet::new(), 10);
        assert!(r.is_fully_valid());
    }

    #[test]
    fn shortfall_alignment_and_duration() {
        let a = pgt(1, &[10, 1, 2, 11], 2, 0, 3);
        let mut s = CompiledSchedule::default();
        put(&mut s, &a, 0);
        s.components.get_mut(&ComponentId(2)).unwrap().clear();
        put(&mut s, &a, 99);
        let r = validate_schedule(&s, std::slice::from_ref(&a), &BTreeSet::from([a.id]), 100);
        assert_eq!(r.shortfalls, vec![Shortfall { pgt: a.id, scheduled: 2, required: 3 }]);
        assert_eq!(r.misaligned, vec![(a.id, 0)]);
        assert!(!r.within_interval);
    }
}
