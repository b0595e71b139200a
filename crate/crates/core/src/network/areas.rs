use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::graph::{ComponentId, ComponentKind, ResourceGraph};

/// Local areas: connected pieces of the graph once backbones are removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalAreaSet {
    areas: Vec<BTreeSet<ComponentId>>,
    area_of: BTreeMap<ComponentId, usize>,
}

impl LocalAreaSet {
    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn areas(&self) -> &[BTreeSet<ComponentId>] {
        &self.areas
    }

    /// Area index of a non-backbone vertex.
    pub fn area_of(&self, id: ComponentId) -> Option<usize> {
        self.area_of.get(&id).copied()
    }
}

/// Areas are indexed by ascending smallest member id.
pub fn compute_local_areas(graph: &ResourceGraph) -> LocalAreaSet {
    let in_area = |k: ComponentKind| matches!(k, ComponentKind::Egi | ComponentKind::Junction);
    let mut seen = BTreeSet::new();
    let mut areas: Vec<BTreeSet<ComponentId>> = Vec::new();
    for (root, kind) in graph.vertices() {
        if !in_area(kind) || seen.contains(&root) {
            continue;
        }
        let mut area = BTreeSet::from([root]);
        seen.insert(root);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for n in graph.neighbors(v) {
                if in_area(graph.kind(n).unwrap()) && seen.insert(n) {
                    area.insert(n);
                    queue.push_back(n);
                }
            }
        }
        areas.push(area);
    }
    let mut area_of: BTreeMap<ComponentId, usize> = BTreeMap::new();
    for (i, area) in areas.iter().enumerate() {
        for &v in area {
            area_of.insert(v, i);
        }
    }
    for e in graph.end_nodes() {
        if let Some(&egi) = graph.egis_of(e).first() {
            let i = area_of[&egi];
            area_of.insert(e, i);
            areas[i].insert(e);
        }
    }
    // Vertices are visited in id order, so areas are already sorted by their first member.
    LocalAreaSet { areas, area_of }
}
