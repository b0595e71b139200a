use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::schedule::NetworkSchedule;
use crate::demand::{DemandId, PgtId};
use crate::network::ComponentId;
use crate::time::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CompiledEntry {
    pub pgt: PgtId,
    pub demand: DemandId,
    pub start_ns: Nanos,
    pub end_ns: Nanos,
}

/// One exported line: the schedule of a single component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSchedule {
    pub component_id: ComponentId,
    pub interval: u64,
    pub version: u64,
    pub pgas: Vec<CompiledEntry>,
}

/// Flat per-component schedules, end nodes included.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompiledSchedule {
    pub interval: u64,
    pub version: u64,
    pub components: BTreeMap<ComponentId, Vec<CompiledEntry>>,
}

pub fn compile_schedule(schedule: &NetworkSchedule) -> CompiledSchedule {
    let mut components: BTreeMap<ComponentId, Vec<CompiledEntry>> = BTreeMap::new();
    for (r, pgas) in schedule.resources() {
        components.insert(r, pgas.map(|p| CompiledEntry { pgt: p.pgt, demand: p.demand, start_ns: p.start, end_ns: p.end }).collect());
    }
    for (&id, task) in schedule.tasks() {
        let entries: Vec<CompiledEntry> =
            schedule.starts(id).map(|s| CompiledEntry { pgt: id, demand: task.demand, start_ns: s, end_ns: s + task.duration }).collect();
        let (a, b) = (task.path.source(), task.path.target());
        for end_node in [a, b] {
            components.entry(end_node).or_default().extend_from_slice(&entries);
        }
    }
    for list in components.values_mut() {
        list.sort_by_key(|e| (e.start_ns, e.pgt));
    }
    CompiledSchedule { interval: schedule.interval, version: schedule.version, components }
}

impl CompiledSchedule {
    pub fn lines(&self) -> impl Iterator<Item = ComponentSchedule> + '_ {
        self.components.iter().map(|(&c, pgas)| ComponentSchedule {
            component_id: c,
            interval: self.interval,
            version: self.version,
            pgas: pgas.clone(),
        })
    }

    pub fn to_json_lines(&self) -> String {
        self.lines().map(|l| serde_json::to_string(&l).expect("serializable") + "\n").collect()
    }

    /// Parses JSON lines; all lines must share one interval and version.
    pub fn from_json_lines(text: &str) -> Result<Self, String> {
        let mut out: Option<CompiledSchedule> = None;
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cs: ComponentSchedule = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
            let target = out.get_or_insert_with(|| CompiledSchedule { interval: cs.interval, version: cs.version, ..Default::default() });
            if (target.interval, target.version) != (cs.interval, cs.version) {
                return Err(format!("line {}: interval/version differs from the first line", n + 1));
            }
            target.components.entry(cs.component_id).or_default().extend(cs.pgas);
        }
        Ok(out.unwrap_or_default())
    }

    pub fn component(&self, id: ComponentId) -> &[CompiledEntry] {
        self.components.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Compiled schedules keyed by (interval, version).
#[derive(Debug, Clone, Default)]
pub struct ScheduleStore {
    schedules: BTreeMap<(u64, u64), CompiledSchedule>,
}

impl ScheduleStore {
    pub fn insert(&mut self, schedule: CompiledSchedule) {
        self.schedules.insert((schedule.interval, schedule.version), schedule);
    }

    pub fn get(&self, interval: u64, version: u64) -> Option<&CompiledSchedule> {
        self.schedules.get(&(interval, version))
    }

    pub fn component(&self, interval: u64, version: u64, id: ComponentId) -> Option<&[CompiledEntry]> {
        self.get(interval, version).map(|s| s.component(id))
    }

    /// Drops schedules for intervals before `interval`.
    pub fn prune_before(&mut self, interval: u64) {
        self.schedules.retain(|&(i, _), _| i >= interval);
    }

    pub fn len(&self) -> usize {
        self.schedules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedules.is_empty()
    }
}
