use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::required_time::calculate_required_time;
use crate::demand::{Pgt, PgtId};
use crate::network::{AssociatedResourceMap, CellKey, ComponentId, Path, PathPartition};
use crate::time::Nanos;

/// Active tasks whose paths share one partition cell, sorted by
/// (`min_alloc`, id).
#[derive(Debug, Clone, PartialEq)]
pub struct FillingClass {
    pub cell: CellKey,
    tasks: Vec<Pgt>,
    required: Nanos,
}

impl FillingClass {
    pub fn new(cell: CellKey) -> Self {
        FillingClass { cell, tasks: Vec::new(), required: 0 }
    }

    pub fn tasks(&self) -> &[Pgt] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn required_time(&self) -> Nanos {
        self.required
    }

    /// Position that keeps the (`min_alloc`, id) order.
    pub fn insertion_index(&self, pgt: &Pgt) -> usize {
        self.tasks.partition_point(|t| (t.min_alloc, t.id) < (pgt.min_alloc, pgt.id))
    }

    /// Required time of this class with `pgt` added, without modifying it.
    pub fn required_time_with(&self, pgt: &Pgt) -> Nanos {
        let at = self.insertion_index(pgt);
        let mut shapes: Vec<_> = self.tasks.iter().map(Into::into).collect();
        shapes.insert(at, pgt.into());
        super::required_time::required_time(&shapes)
    }

    pub fn insert(&mut self, pgt: Pgt) {
        let at = self.insertion_index(&pgt);
        self.tasks.insert(at, pgt);
        self.refresh();
    }

    pub fn remove(&mut self, id: PgtId) -> Option<Pgt> {
        let at = self.tasks.iter().position(|t| t.id == id)?;
        let out = self.tasks.remove(at);
        self.refresh();
        Some(out)
    }

    fn refresh(&mut self) {
        self.required = calculate_required_time(&self.tasks);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FillingClassError {
    #[error("path {0} is not in the current partition")]
    NoClass(Path),
}

/// Filling classes for every cell of one partition version.
#[derive(Debug, Clone)]
pub struct FillingClassSet {
    classes: BTreeMap<CellKey, FillingClass>,
    xi: AssociatedResourceMap,
    greater: BTreeMap<CellKey, Vec<CellKey>>,
    cell_of: HashMap<Path, CellKey>,
    pub partition_version: u64,
}

impl FillingClassSet {
    /// Empty classes for every cell of `partition`.
    pub fn new(partition: &PathPartition, xi: &AssociatedResourceMap) -> Self {
        let classes = partition.cell_keys().map(|k| (k, FillingClass::new(k))).collect();
        let greater = partition.cell_keys().map(|k| (k, xi.strictly_greater(k).collect())).collect();
        let cell_of = partition.paths().iter().enumerate().map(|(id, p)| (p.clone(), partition.cell_of(id))).collect();
        FillingClassSet { classes, xi: xi.clone(), greater, cell_of, partition_version: partition.version }
    }

    pub fn xi(&self) -> &AssociatedResourceMap {
        &self.xi
    }

    pub fn resources(&self, cell: CellKey) -> &BTreeSet<ComponentId> {
        self.xi.get(cell)
    }

    /// Cells whose resources strictly contain those of `cell`.
    pub fn strictly_greater(&self, cell: CellKey) -> &[CellKey] {
        self.greater.get(&cell).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Classes in scheduling order: backbone, junctions, interfaces.
    pub fn iter(&self) -> impl Iterator<Item = &FillingClass> {
        self.classes.values()
    }

    pub fn get(&self, cell: CellKey) -> Option<&FillingClass> {
        self.classes.get(&cell)
    }

    pub fn get_mut(&mut self, cell: CellKey) -> Option<&mut FillingClass> {
        self.classes.get_mut(&cell)
    }

    pub fn class_of(&self, path: &Path) -> Result<CellKey, FillingClassError> {
        self.cell_of.get(path).copied().ok_or_else(|| FillingClassError::NoClass(path.clone()))
    }

    pub fn assign(&mut self, pgt: Pgt) -> Result<CellKey, (FillingClassError, Pgt)> {
        match self.class_of(&pgt.path) {
            Ok(cell) => {
                self.classes.get_mut(&cell).expect("class for every cell").insert(pgt);
                Ok(cell)
            }
            Err(e) => Err((e, pgt)),
        }
    }

    pub fn remove(&mut self, id: PgtId) -> Option<Pgt> {
        self.classes.values_mut().find_map(|c| c.remove(id))
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Pgt> {
        self.classes.values().flat_map(|c| c.tasks.iter())
    }

    pub fn task_count(&self) -> usize {
        self.classes.values().map(FillingClass::len).sum()
    }

    pub fn find(&self, id: PgtId) -> Option<&Pgt> {
        self.tasks().find(|t| t.id == id)
    }

    /// Drains every task, leaving the classes empty.
    pub fn take_tasks(&mut self) -> Vec<Pgt> {
        let mut out = Vec::new();
        for class in self.classes.values_mut() {
            out.append(&mut class.tasks);
            class.refresh();
        }
        out
    }

    /// Per-resource sum of required times of the classes using it.
    pub fn reserved_time(&self) -> BTreeMap<ComponentId, Nanos> {
        let mut out: BTreeMap<ComponentId, Nanos> = BTreeMap::new();
        for class in self.classes.values() {
            for &r in self.xi.get(class.cell) {
                *out.entry(r).or_default() += class.required;
            }
        }
        out
    }

    /// Bound on the minimal-phase duration: the largest per-resource reserved time.
    pub fn good_accounting(&self) -> Nanos {
        self.reserved_time().into_values().max().unwrap_or(0)
    }

    /// Block offset of a class in the minimal phase.
    pub fn block_start(&self, cell: CellKey) -> Nanos {
        self.strictly_greater(cell).iter().map(|c| self.classes[c].required).sum()
    }
}
