use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::areas::LocalAreaSet;
use super::graph::{ComponentId, ComponentKind, ResourceGraph};
use super::paths::Path;

/// Key of one partition cell.
///
/// The derived order (backbone, junction cells by area, interface cells by
/// EGI id) is the class order used by the minimal allocation phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellKey {
    Backbone,
    Junction(usize),
    Interface(ComponentId),
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellKey::Backbone => write!(f, "backbone"),
            CellKey::Junction(a) => write!(f, "junction:{a}"),
            CellKey::Interface(i) => write!(f, "interface:{i}"),
        }
    }
}

impl FromStr for CellKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid cell key `{s}`");
        match s.split_once(':') {
            None if s == "backbone" => Ok(CellKey::Backbone),
            Some(("junction", a)) => a.parse().map(CellKey::Junction).map_err(|_| bad()),
            Some(("interface", i)) => i.parse().map(|i| CellKey::Interface(ComponentId(i))).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl Serialize for CellKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CellKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Index of a path inside one [`PathPartition`].
pub type PathId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("path {0} fits no partition cell")]
    InternalError(Path),
}

/// Disjoint partition of the allowed paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPartition {
    paths: Vec<Path>,
    cell_of: Vec<CellKey>,
    cells: BTreeMap<CellKey, Vec<PathId>>,
    by_pair: BTreeMap<(ComponentId, ComponentId), Vec<PathId>>,
    lookup: HashMap<Path, PathId>,
    pub version: u64,
}

impl PathPartition {
    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, id: PathId) -> &Path {
        &self.paths[id]
    }

    pub fn cell_of(&self, id: PathId) -> CellKey {
        self.cell_of[id]
    }

    pub fn cells(&self) -> &BTreeMap<CellKey, Vec<PathId>> {
        &self.cells
    }

    pub fn cell_keys(&self) -> impl Iterator<Item = CellKey> + '_ {
        self.cells.keys().copied()
    }

    pub fn find(&self, path: &Path) -> Option<PathId> {
        self.lookup.get(path).copied()
    }

    /// Cell holding `path`, if the path belongs to this partition.
    pub fn cell_for(&self, path: &Path) -> Option<CellKey> {
        self.find(path).map(|id| self.cell_of[id])
    }

    /// Paths between two end nodes, in either orientation.
    pub fn between(&self, a: ComponentId, b: ComponentId) -> &[PathId] {
        self.by_pair.get(&(a.min(b), a.max(b))).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (ComponentId, ComponentId)> + '_ {
        self.by_pair.keys().copied()
    }
}

/// Internal resources associated with each cell.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociatedResourceMap {
    pub by_cell: BTreeMap<CellKey, BTreeSet<ComponentId>>,
}

impl AssociatedResourceMap {
    pub fn get(&self, cell: CellKey) -> &BTreeSet<ComponentId> {
        static EMPTY: BTreeSet<ComponentId> = BTreeSet::new();
        self.by_cell.get(&cell).unwrap_or(&EMPTY)
    }

    /// Cells whose resource set strictly contains that of `cell`.
    pub fn strictly_greater(&self, cell: CellKey) -> impl Iterator<Item = CellKey> + '_ {
        let own = self.get(cell);
        self.by_cell.iter().filter(move |(_, xi)| xi.len() > own.len() && own.is_subset(xi)).map(|(&k, _)| k)
    }

    /// Pairs of cells breaking well-behavedness (equal or overlapping non-nested sets).
    pub fn well_behaved_violations(&self) -> Vec<(CellKey, CellKey)> {
        let cells: Vec<(&CellKey, &BTreeSet<ComponentId>)> = self.by_cell.iter().filter(|(_, xi)| !xi.is_empty()).collect();
        let mut bad = Vec::new();
        for (i, (ka, a)) in cells.iter().enumerate() {
            for (kb, b) in &cells[i + 1..] {
                let nested = a.is_subset(b) || b.is_subset(a);
                if a == b || (!a.is_disjoint(b) && !nested) {
                    bad.push((**ka, **kb));
                }
            }
        }
        bad
    }

    pub fn is_well_behaved(&self) -> bool {
        self.well_behaved_violations().is_empty()
    }
}

/// Places each allowed path in its cell and computes the associated resources.
pub fn build_path_partition(
    graph: &ResourceGraph,
    paths: Vec<Path>,
    areas: &LocalAreaSet,
    version: u64,
) -> Result<(PathPartition, AssociatedResourceMap), PartitionError> {
    let mut cells: BTreeMap<CellKey, Vec<PathId>> = BTreeMap::new();
    if graph.count(ComponentKind::Backbone) > 0 {
        cells.insert(CellKey::Backbone, Vec::new());
    }
    for j in graph.vertices_of(ComponentKind::Junction) {
        if let Some(a) = areas.area_of(j) {
            cells.entry(CellKey::Junction(a)).or_default();
        }
    }
    for i in graph.vertices_of(ComponentKind::Egi) {
        cells.insert(CellKey::Interface(i), Vec::new());
    }
    let mut xi = AssociatedResourceMap { by_cell: cells.keys().map(|&k| (k, BTreeSet::new())).collect() };

    let mut cell_of = Vec::with_capacity(paths.len());
    let mut by_pair: BTreeMap<(ComponentId, ComponentId), Vec<PathId>> = BTreeMap::new();
    let mut lookup = HashMap::with_capacity(paths.len());
    for (id, path) in paths.iter().enumerate() {
        let cell = classify(graph, areas, path).ok_or_else(|| PartitionError::InternalError(path.clone()))?;
        cells.get_mut(&cell).ok_or_else(|| PartitionError::InternalError(path.clone()))?.push(id);
        xi.by_cell.get_mut(&cell).unwrap().extend(path.interior().iter().copied());
        cell_of.push(cell);
        by_pair.entry(path.endpoints()).or_default().push(id);
        lookup.insert(path.clone(), id);
    }
    Ok((PathPartition { paths, cell_of, cells, by_pair, lookup, version }, xi))
}

fn classify(graph: &ResourceGraph, areas: &LocalAreaSet, path: &Path) -> Option<CellKey> {
    let kind = |v: &ComponentId| graph.kind(*v);
    let inner = path.interior();
    if inner.iter().any(|v| kind(v) == Some(ComponentKind::Backbone)) {
        return Some(CellKey::Backbone);
    }
    if let Some(j) = inner.iter().find(|v| kind(v) == Some(ComponentKind::Junction)) {
        return areas.area_of(*j).map(CellKey::Junction);
    }
    match inner {
        [i] if kind(i) == Some(ComponentKind::Egi) => Some(CellKey::Interface(*i)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::areas::compute_local_areas;
    use crate::network::paths::enumerate_allowed_paths;
    use crate::network::topology::{dumbbell, random_topology, Dumbbell, TopologyParams};

    fn build(g: &ResourceGraph) -> (PathPartition, AssociatedResourceMap) {
        let areas = compute_local_areas(g);
        build_path_partition(g, enumerate_allowed_paths(g), &areas, 1).unwrap()
    }

    #[test]
    fn dumbbell_cells() {
        let g = dumbbell();
        let (part, xi) = build(&g);
        let keys: Vec<CellKey> = part.cell_keys().collect();
        assert_eq!(
            keys,
            vec![
                CellKey::Backbone,
                CellKey::Junction(0),
                CellKey::Junction(1),
                CellKey::Interface(Dumbbell::I1),
                CellKey::Interface(Dumbbell::I2),
                CellKey::Interface(Dumbbell::I3),
            ]
        );
        let bb: BTreeSet<_> = [Dumbbell::I1, Dumbbell::I2, Dumbbell::I3, Dumbbell::J1, Dumbbell::J2, Dumbbell::B1].into();
        assert_eq!(xi.get(CellKey::Backbone), &bb);
        assert_eq!(part.cells()[&CellKey::Backbone].len(), 50);
        assert_eq!(part.cells()[&CellKey::Junction(0)].len(), 25);
        assert!(part.cells()[&CellKey::Junction(1)].is_empty());
        for egi in [Dumbbell::I1, Dumbbell::I2, Dumbbell::I3] {
            assert_eq!(part.cells()[&CellKey::Interface(egi)].len(), 10);
            assert_eq!(xi.get(CellKey::Interface(egi)), &BTreeSet::from([egi]));
        }
        assert!(xi.is_well_behaved());
    }

    #[test]
    fn star_network_has_one_populated_cell() {
        let mut g = ResourceGraph::new();
        g.add_vertex(ComponentId(0), ComponentKind::Egi).unwrap();
        for e in 1..=4 {
            g.add_vertex(ComponentId(e), ComponentKind::EndNode).unwrap();
            g.add_edge(ComponentId(0), ComponentId(e)).unwrap();
        }
        let (part, xi) = build(&g);
        assert_eq!(part.cell_keys().collect::<Vec<_>>(), vec![CellKey::Interface(ComponentId(0))]);
        assert_eq!(part.cells()[&CellKey::Interface(ComponentId(0))].len(), 6);
        assert_eq!(xi.get(CellKey::Interface(ComponentId(0))), &BTreeSet::from([ComponentId(0)]));
    }

    #[test]
    fn strict_supersets() {
        let (_, xi) = build(&dumbbell());
        let greater: Vec<_> = xi.strictly_greater(CellKey::Interface(Dumbbell::I1)).collect();
        assert_eq!(greater, vec![CellKey::Backbone, CellKey::Junction(0)]);
        assert_eq!(xi.strictly_greater(CellKey::Backbone).count(), 0);
    }

    #[test]
    fn cell_key_strings() {
        for key in [CellKey::Backbone, CellKey::Junction(3), CellKey::Interface(ComponentId(17))] {
            assert_eq!(key.to_string().parse::<CellKey>().unwrap(), key);
        }
        assert!("junction:x".parse::<CellKey>().is_err());
    }

    #[test]
    fn random_partitions_are_disjoint_and_complete() {
        for seed in 0..100u64 {
            let local_areas = 1 + (seed % 4) as usize;
            let params = TopologyParams { backbones: local_areas - 1 + (seed % 3) as usize, local_areas, end_nodes: 8 + (seed % 7) as usize };
            let g = random_topology(params, seed).unwrap();
            let paths = enumerate_allowed_paths(&g);
            let (part, xi) = build(&g);
            let mut seen = BTreeSet::new();
            for ids in part.cells().values() {
                for &id in ids {
                    assert!(seen.insert(id), "path in two cells");
                }
            }
            assert_eq!(seen.len(), paths.len());
            assert!(xi.is_well_behaved(), "seed {seed}: {:?}", xi.well_behaved_violations());
        }
    }
}
