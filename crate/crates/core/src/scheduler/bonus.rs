use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use super::classes::{FillingClass, FillingClassSet};
use super::schedule::NetworkSchedule;
use crate::network::ComponentId;
use crate::time::Nanos;

/// Outcome of the bonus phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BonusStats {
    pub pgas_added: usize,
    pub candidate_times: usize,
    /// The wall-clock deadline stopped the phase early.
    pub cut_off: bool,
}

/// Pending release times, at most one per task, equal times merged.
#[derive(Default)]
struct Releases {
    by_time: BTreeMap<Nanos, Vec<usize>>,
    pending: BTreeMap<usize, Nanos>,
}

impl Releases {
    fn register(&mut self, task: usize, at: Nanos) {
        if let Some(old) = self.pending.insert(task, at) {
            if old == at {
                return;
            }
            if let Some(v) = self.by_time.get_mut(&old) {
                v.retain(|&t| t != task);
                if v.is_empty() {
                    self.by_time.remove(&old);
                }
            }
        }
        self.by_time.entry(at).or_default().push(task);
    }

    fn first(&self) -> Option<Nanos> {
        self.by_time.keys().next().copied()
    }

    fn pop(&mut self) {
        if let Some((_, tasks)) = self.by_time.pop_first() {
            for t in tasks {
                self.pending.remove(&t);
            }
        }
    }
}

/// Round-robin filling of the idle time left on the class's resources.
pub fn round_robin_bonus(
    class: &FillingClass,
    resources: &BTreeSet<ComponentId>,
    schedule: &mut NetworkSchedule,
    t_si: Nanos,
    deadline: Option<Instant>,
) -> BonusStats {
    let tasks = class.tasks();
    let mut stats = BonusStats::default();
    if tasks.is_empty() {
        return stats;
    }
    let resources: Vec<ComponentId> = resources.iter().copied().collect();
    let separated: Vec<usize> = (0..tasks.len()).filter(|&i| tasks[i].minsep > 0).collect();
    let mut releases = Releases::default();
    let mut k = 0usize;
    let mut t: Nanos = 0;
    while t < t_si {
        stats.candidate_times += 1;
        if stats.candidate_times % 64 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
            stats.cut_off = true;
            break;
        }
        let all_busy = resources.iter().all(|&r| schedule.busy_at(r, t));
        let order = (k..tasks.len()).chain(0..k);
        // With every resource busy only separated tasks can register releases.
        let visit: Box<dyn Iterator<Item = usize>> = if all_busy {
            let k0 = separated.partition_point(|&i| i < k);
            Box::new(separated[k0..].iter().chain(&separated[..k0]).copied())
        } else {
            Box::new(order)
        };
        for i in visit {
            let task = &tasks[i];
            let available = task.resources().iter().all(|&r| schedule.free(r, t, task.duration));
            let left = schedule.left_violation(task, t);
            let right = schedule.right_violation(task, t);
            if available && left.is_none() && !right && t + task.duration < t_si {
                schedule.add(task, t);
                stats.pgas_added += 1;
                k = (i + 1) % tasks.len();
            } else if let Some(end) = left {
                releases.register(i, end + task.minsep);
            }
        }
        let next_end = resources.iter().filter_map(|&r| schedule.next_end_after(r, t)).min();
        t = match (next_end, releases.first()) {
            (None, None) => break,
            (Some(e), None) => e,
            (e, Some(r)) if e.is_none_or(|e| r <= e) => {
                releases.pop();
                r
            }
            (Some(e), Some(_)) => e,
            _ => unreachable!(),
        };
    }
    stats
}

/// Bonus phase over all classes in scheduling order.
pub fn bonus_phase(classes: &FillingClassSet, schedule: &mut NetworkSchedule, t_si: Nanos, deadline: Option<Instant>) -> BonusStats {
    let mut total = BonusStats::default();
    for class in classes.iter().filter(|c| !c.is_empty()) {
        let s = round_robin_bonus(class, classes.resources(class.cell), schedule, t_si, deadline);
        total.pgas_added += s.pgas_added;
        total.candidate_times += s.candidate_times;
        if s.cut_off {
            total.cut_off = true;
            break;
        }
    }
    total
}
