use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque identifier of a network component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(pub u32);

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    EndNode,
    Egi,
    Junction,
    Backbone,
}

impl ComponentKind {
    /// Internal resources are the schedulable ones: everything but end nodes.
    pub fn is_internal(self) -> bool {
        self != ComponentKind::EndNode
    }

    /// Whether an edge between the two kinds is in the allowed edge set.
    pub fn edge_allowed(a: ComponentKind, b: ComponentKind) -> bool {
        use ComponentKind::*;
        matches!((a, b), (EndNode, Egi) | (Egi, EndNode) | (Egi, Junction) | (Junction, Egi) | (Junction, Backbone) | (Backbone, Junction))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("component {0} already exists")]
    DuplicateVertex(ComponentId),
    #[error("unknown component {0}")]
    UnknownVertex(ComponentId),
    #[error("self-loop on component {0}")]
    SelfLoop(ComponentId),
}

/// Undirected graph of network components and their logical connections.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TopologyFile", into = "TopologyFile")]
pub struct ResourceGraph {
    kinds: BTreeMap<ComponentId, ComponentKind>,
    adjacency: BTreeMap<ComponentId, BTreeSet<ComponentId>>,
    discoverable: BTreeSet<ComponentId>,
}

impl ResourceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: ComponentId, kind: ComponentKind) -> Result<(), GraphError> {
        if self.kinds.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        self.kinds.insert(id, kind);
        self.adjacency.insert(id, BTreeSet::new());
        Ok(())
    }

    /// Adds an undirected edge. Re-adding an existing edge is a no-op.
    pub fn add_edge(&mut self, a: ComponentId, b: ComponentId) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        for v in [a, b] {
            if !self.kinds.contains_key(&v) {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        self.adjacency.get_mut(&a).unwrap().insert(b);
        self.adjacency.get_mut(&b).unwrap().insert(a);
        Ok(())
    }

    pub fn set_discoverable(&mut self, id: ComponentId, discoverable: bool) -> Result<(), GraphError> {
        if !self.kinds.contains_key(&id) {
            return Err(GraphError::UnknownVertex(id));
        }
        if discoverable {
            self.discoverable.insert(id);
        } else {
            self.discoverable.remove(&id);
        }
        Ok(())
    }

    pub fn kind(&self, id: ComponentId) -> Option<ComponentKind> {
        self.kinds.get(&id).copied()
    }

    pub fn contains(&self, id: ComponentId) -> bool {
        self.kinds.contains_key(&id)
    }

    pub fn is_discoverable(&self, id: ComponentId) -> bool {
        self.discoverable.contains(&id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (ComponentId, ComponentKind)> + '_ {
        self.kinds.iter().map(|(&id, &k)| (id, k))
    }

    pub fn vertices_of(&self, kind: ComponentKind) -> impl Iterator<Item = ComponentId> + '_ {
        self.kinds.iter().filter(move |(_, &k)| k == kind).map(|(&id, _)| id)
    }

    pub fn count(&self, kind: ComponentKind) -> usize {
        self.kinds.values().filter(|&&k| k == kind).count()
    }

    pub fn vertex_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn neighbors(&self, id: ComponentId) -> impl Iterator<Item = ComponentId> + '_ {
        self.adjacency.get(&id).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn has_edge(&self, a: ComponentId, b: ComponentId) -> bool {
        self.adjacency.get(&a).is_some_and(|s| s.contains(&b))
    }

    /// Each undirected edge once, lower id first.
    pub fn edges(&self) -> impl Iterator<Item = (ComponentId, ComponentId)> + '_ {
        self.adjacency.iter().flat_map(|(&a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn end_nodes(&self) -> impl Iterator<Item = ComponentId> + '_ {
        self.vertices_of(ComponentKind::EndNode)
    }

    /// EGIs adjacent to an end node.
    pub fn egis_of(&self, end_node: ComponentId) -> Vec<ComponentId> {
        self.neighbors(end_node).filter(|&n| self.kind(n) == Some(ComponentKind::Egi)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeCheck {
    pub a: ComponentId,
    pub b: ComponentId,
    pub allowed: bool,
}

/// Result of [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub edges: Vec<EdgeCheck>,
    pub internally_connected: bool,
    /// End nodes not attached to exactly one EGI.
    pub bad_attachments: Vec<ComponentId>,
}

impl ValidationReport {
    pub fn forbidden_edges(&self) -> impl Iterator<Item = &EdgeCheck> {
        self.edges.iter().filter(|e| !e.allowed)
    }

    pub fn is_valid(&self) -> bool {
        self.internally_connected && self.bad_attachments.is_empty() && self.edges.iter().all(|e| e.allowed)
    }
}

/// Classifies every edge and checks internal connectivity.
pub fn validate_graph(graph: &ResourceGraph) -> ValidationReport {
    let edges = graph
        .edges()
        .map(|(a, b)| EdgeCheck { a, b, allowed: ComponentKind::edge_allowed(graph.kind(a).unwrap(), graph.kind(b).unwrap()) })
        .collect();
    let bad_attachments = graph.end_nodes().filter(|&e| graph.egis_of(e).len() != 1).collect();
    ValidationReport { edges, internally_connected: internally_connected(graph), bad_attachments }
}

/// True iff every vertex pair is joined by a path whose interior has no end node.
pub fn internally_connected(graph: &ResourceGraph) -> bool {
    let internal: Vec<ComponentId> = graph.vertices().filter(|(_, k)| k.is_internal()).map(|(id, _)| id).collect();
    let ends: Vec<ComponentId> = graph.end_nodes().collect();
    let Some(&root) = internal.first() else {
        return ends.iter().enumerate().all(|(i, &a)| ends[i + 1..].iter().all(|&b| graph.has_edge(a, b)));
    };
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for n in graph.neighbors(v) {
            if graph.kind(n).unwrap().is_internal() && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == internal.len() && ends.iter().all(|&e| graph.neighbors(e).any(|n| graph.kind(n).unwrap().is_internal()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyVertex {
    pub id: ComponentId,
    pub kind: ComponentKind,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub discoverable: bool,
}

/// On-disk topology format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyFile {
    pub vertices: Vec<TopologyVertex>,
    pub edges: Vec<[ComponentId; 2]>,
}

impl TryFrom<TopologyFile> for ResourceGraph {
    type Error = GraphError;

    fn try_from(file: TopologyFile) -> Result<Self, GraphError> {
        let mut g = ResourceGraph::new();
        for v in &file.vertices {
            g.add_vertex(v.id, v.kind)?;
            g.set_discoverable(v.id, v.discoverable)?;
        }
        for [a, b] in file.edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }
}

impl From<ResourceGraph> for TopologyFile {
    fn from(g: ResourceGraph) -> Self {
        TopologyFile {
            vertices: g.vertices().map(|(id, kind)| TopologyVertex { id, kind, discoverable: g.is_discoverable(id) }).collect(),
            edges: g.edges().map(|(a, b)| [a, b]).collect(),
        }
    }
}
