use std::collections::BTreeSet;

use super::admit::admit_tasks;
use super::classes::FillingClassSet;
use crate::demand::{Pgt, PgtId, TaskAlternatives};
use crate::network::{AssociatedResourceMap, PathPartition};
use crate::time::Nanos;

/// What happened to the previously active tasks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateReport {
    pub terminated: Vec<PgtId>,
    pub expired: Vec<PgtId>,
    /// (old task, replacement) for tasks moved to a path of the new partition.
    pub rehomed: Vec<(PgtId, Pgt)>,
    /// Tasks whose path vanished and that could not be moved.
    pub removed: Vec<PgtId>,
}

/// Drops terminated and expired tasks and, when the partition changed,
/// rebuilds the classes and applies the missing-path rule.
///
/// `alternatives` proposes replacement tasks for a task whose path is no
/// longer allowed; the first one that passes admission is kept.
pub fn update_filling_classes(
    mut prev: FillingClassSet,
    terminations: &BTreeSet<PgtId>,
    partition: &PathPartition,
    xi: &AssociatedResourceMap,
    now: f64,
    t_si: Nanos,
    alternatives: &mut dyn FnMut(&Pgt) -> TaskAlternatives,
) -> (FillingClassSet, UpdateReport) {
    let mut report = UpdateReport::default();
    let rebuild = prev.partition_version != partition.version;
    let tasks = prev.take_tasks();
    let mut classes = if rebuild { FillingClassSet::new(partition, xi) } else { prev };
    let mut missing = Vec::new();
    for task in tasks {
        if terminations.contains(&task.id) {
            report.terminated.push(task.id);
        } else if task.t_expiry <= now {
            report.expired.push(task.id);
        } else if let Err((_, task)) = classes.assign(task) {
            missing.push(task);
        }
    }
    for task in missing {
        let out = admit_tasks(vec![alternatives(&task)], &mut classes, t_si);
        match out.accepted.into_iter().next() {
            Some(new) => report.rehomed.push((task.id, new)),
            None => report.removed.push(task.id),
        }
    }
    (classes, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandId;
    use crate::network::{build_path_partition, compute_local_areas, dumbbell, Dumbbell, NetworkModel, Path};

    fn pgt(id: u64, path: Path, expiry: f64) -> Pgt {
        Pgt { id: PgtId(id), demand: DemandId(id), duration: 5, p_packet: 0.5, min_alloc: 2, path, minsep: 1, t_start: 0.0, t_expiry: expiry }
    }

    fn local(egi: u32) -> Path {
        let egis = [Dumbbell::I1, Dumbbell::I2, Dumbbell::I3];
        Path(vec![Dumbbell::end_node(egi, 0), egis[egi as usize], Dumbbell::end_node(egi, 1)])
    }

    fn none(_: &Pgt) -> TaskAlternatives {
        Vec::new()
    }

    #[test]
    fn identity_without_changes() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let mut set = FillingClassSet::new(&m.partition, &m.xi);
        set.assign(pgt(1, local(0), 100.0)).unwrap();
        set.assign(pgt(2, local(2), 100.0)).unwrap();
        let (next, report) = update_filling_classes(set.clone(), &BTreeSet::new(), &m.partition, &m.xi, 10.0, 1000, &mut none);
        assert_eq!(report, UpdateReport::default());
        let a: Vec<_> = set.iter().map(|c| (c.cell, c.tasks().to_vec(), c.required_time())).collect();
        let b: Vec<_> = next.iter().map(|c| (c.cell, c.tasks().to_vec(), c.required_time())).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn expiry_boundary_and_termination() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let mut set = FillingClassSet::new(&m.partition, &m.xi);
        set.assign(pgt(1, local(0), 10.0)).unwrap();
        set.assign(pgt(2, local(1), 11.0)).unwrap();
        set.assign(pgt(3, local(2), 11.0)).unwrap();
        let (next, report) = update_filling_classes(set, &BTreeSet::from([PgtId(3)]), &m.partition, &m.xi, 10.0, 1000, &mut none);
        assert_eq!(report.expired, vec![PgtId(1)]);
        assert_eq!(report.terminated, vec![PgtId(3)]);
        assert_eq!(next.task_count(), 1);
    }

    #[test]
    fn missing_path_rule() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let mut set = FillingClassSet::new(&m.partition, &m.xi);
        let dropped = local(0);
        set.assign(pgt(1, dropped.clone(), 100.0)).unwrap();
        set.assign(pgt(2, Path(vec![Dumbbell::end_node(0, 2), Dumbbell::I1, Dumbbell::end_node(0, 3)]), 100.0)).unwrap();

        let areas = compute_local_areas(&m.graph);
        let paths: Vec<Path> = m.partition.paths().iter().filter(|p| **p != dropped).cloned().collect();
        let (partition, xi) = build_path_partition(&m.graph, paths, &areas, 2).unwrap();

        // No replacement offered: removed.
        let (next, report) = update_filling_classes(set.clone(), &BTreeSet::new(), &partition, &xi, 0.0, 1000, &mut none);
        assert_eq!(report.removed, vec![PgtId(1)]);
        assert_eq!(next.task_count(), 1);
        assert_eq!(next.partition_version, 2);

        // A replacement on a surviving path is admitted.
        let surviving = Path(vec![Dumbbell::end_node(0, 0), Dumbbell::I1, Dumbbell::end_node(0, 4)]);
        let mut offer = |old: &Pgt| vec![Pgt { id: PgtId(10), path: surviving.clone(), ..old.clone() }];
        let (next, report) = update_filling_classes(set, &BTreeSet::new(), &partition, &xi, 0.0, 1000, &mut offer);
        assert_eq!(report.rehomed.len(), 1);
        assert_eq!(report.rehomed[0].0, PgtId(1));
        assert!(next.find(PgtId(10)).is_some());
    }
}
