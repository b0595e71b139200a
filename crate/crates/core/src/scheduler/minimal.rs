use super::classes::{FillingClass, FillingClassSet};
use super::required_time::{cycle_plan, TaskShape};
use super::schedule::NetworkSchedule;
use crate::time::Nanos;

/// Appends the cycle-structured block of one class starting at `t0`.
///
/// Stage `m` repeats a cycle of length `c_m` holding one back-to-back PGA of
/// every task `x >= m` `n_m` times, then places the final PGA of task `m`.
/// Returns the end of the block.
pub fn direct_allocation(class: &FillingClass, schedule: &mut NetworkSchedule, t0: Nanos) -> Nanos {
    let tasks = class.tasks();
    let shapes: Vec<TaskShape> = tasks.iter().map(Into::into).collect();
    let plan = cycle_plan(&shapes);
    let mut t_start = t0;
    for (m, &(c, n)) in plan.iter().enumerate() {
        for k in 0..Nanos::from(n) {
            let mut offset = 0;
            for task in &tasks[m..] {
                schedule.add(task, t_start + k * c + offset);
                offset += task.duration;
            }
        }
        let last = t_start + Nanos::from(n) * c;
        schedule.add(&tasks[m], last);
        t_start = last + tasks[m].duration;
    }
    t_start
}

/// Minimal allocation phase: each class gets its block after the blocks of
/// all classes whose resources strictly contain its own.
pub fn minimal_phase(classes: &FillingClassSet, schedule: &mut NetworkSchedule) -> usize {
    let before = schedule.total_pgas();
    for class in classes.iter().filter(|c| !c.is_empty()) {
        direct_allocation(class, schedule, classes.block_start(class.cell));
    }
    schedule.total_pgas() - before
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{DemandId, Pgt, PgtId};
    use crate::network::{CellKey, ComponentId, Path};

    fn pgt(id: u64, duration: Nanos, minsep: Nanos, min_alloc: u32) -> Pgt {
        Pgt {
            id: PgtId(id),
            demand: DemandId(id),
            duration,
            p_packet: 0.5,
            min_alloc,
            path: Path(vec![ComponentId(10), ComponentId(1), ComponentId(11)]),
            minsep,
            t_start: 0.0,
            t_expiry: 1e9,
        }
    }

    fn class(tasks: Vec<Pgt>) -> FillingClass {
        let mut c = FillingClass::new(CellKey::Interface(ComponentId(1)));
        tasks.into_iter().for_each(|t| c.insert(t));
        c
    }

    #[test]
    fn empty_class() {
        let mut s = NetworkSchedule::new(0, 0);
        assert_eq!(direct_allocation(&class(vec![]), &mut s, 0), 0);
        assert!(s.is_empty());
    }

    #[test]
    fn single_task_with_separation() {
        let mut s = NetworkSchedule::new(0, 0);
        let end = direct_allocation(&class(vec![pgt(1, 1, 3, 2)]), &mut s, 0);
        assert_eq!(s.starts(PgtId(1)).collect::<Vec<_>>(), vec![0, 4]);
        assert_eq!(end, 5);
    }

    #[test]
    fn two_task_block_spans_required_time() {
        let c = class(vec![pgt(1, 2, 0, 2), pgt(2, 3, 4, 3)]);
        let mut s = NetworkSchedule::new(0, 0);
        let end = direct_allocation(&c, &mut s, 0);
        assert_eq!(end, 19);
        assert_eq!(end, c.required_time());
        assert_eq!(s.starts(PgtId(1)).collect::<Vec<_>>(), vec![0, 7]);
        assert_eq!(s.starts(PgtId(2)).collect::<Vec<_>>(), vec![2, 9, 16]);
    }
}
