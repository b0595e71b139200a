//! Resource graph, local areas, allowed paths and the path partition.

mod areas;
mod graph;
mod partition;
mod paths;
mod topology;

pub use areas::{compute_local_areas, LocalAreaSet};
pub use graph::{
    internally_connected, validate_graph, ComponentId, ComponentKind, EdgeCheck, GraphError, ResourceGraph, TopologyFile, TopologyVertex,
    ValidationReport,
};
pub use partition::{build_path_partition, AssociatedResourceMap, CellKey, PartitionError, PathId, PathPartition};
pub use paths::{enumerate_allowed_paths, enumerate_allowed_paths_with, Path};
pub use topology::{dumbbell, random_topology, Dumbbell, TopologyError, TopologyParams};

use thiserror::Error;

/// Everything derived from one validated graph.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub graph: ResourceGraph,
    pub areas: LocalAreaSet,
    pub partition: PathPartition,
    pub xi: AssociatedResourceMap,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("graph failed validation: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

impl NetworkModel {
    /// Validates the graph and derives areas, paths and the partition.
    pub fn build(graph: ResourceGraph, version: u64) -> Result<Self, ModelError> {
        let report = validate_graph(&graph);
        if !report.is_valid() {
            let forbidden: Vec<String> = report.forbidden_edges().map(|e| format!("({}, {})", e.a, e.b)).collect();
            return Err(ModelError::InvalidGraph(format!(
                "forbidden edges [{}], internally connected: {}, end nodes without a single EGI: {:?}",
                forbidden.join(", "),
                report.internally_connected,
                report.bad_attachments.iter().map(|c| c.0).collect::<Vec<_>>()
            )));
        }
        let areas = compute_local_areas(&graph);
        let paths = enumerate_allowed_paths_with(&graph, &areas);
        let (partition, xi) = build_path_partition(&graph, paths, &areas, version)?;
        Ok(NetworkModel { graph, areas, partition, xi })
    }
}
