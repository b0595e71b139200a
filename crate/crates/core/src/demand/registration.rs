use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::buffer::TaskAlternatives;
use super::pgt::{create_pgt, PgtConfig};
use super::types::{Demand, PgtId};
use crate::capabilities::CapabilitiesTable;
use crate::network::{ComponentKind, ResourceGraph};
use crate::time::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegistrationFailure {
    #[error("capability version does not match the current table")]
    StaleCapabilities,
    #[error("unknown end node")]
    UnknownNode,
    #[error("no allowed path between the end nodes")]
    NoPath,
    #[error("malformed demand")]
    Malformed,
    #[error("non-positive demand field")]
    NonPositiveField,
    #[error("expiry is not after the start time")]
    ExpiryBeforeStart,
    #[error("no viable packet generation task")]
    NoViablePgt,
}

fn metadata_check(demand: &Demand, graph: &ResourceGraph, table: &CapabilitiesTable, t_start: f64) -> Result<(), RegistrationFailure> {
    use RegistrationFailure::*;
    let (src, dst) = (demand.meta.src, demand.meta.dst);
    if demand.meta.capability_version != table.version {
        return Err(StaleCapabilities);
    }
    if !graph.contains(src) || !graph.contains(dst) {
        return Err(UnknownNode);
    }
    if src == dst || graph.kind(src) != Some(ComponentKind::EndNode) || graph.kind(dst) != Some(ComponentKind::EndNode) {
        return Err(Malformed);
    }
    if table.feasible_paths(src, dst, f64::NEG_INFINITY).is_empty() {
        return Err(NoPath);
    }
    let p = &demand.packet;
    let numbers = [p.window, p.min_fidelity, demand.minsep, demand.expiry, demand.service_epsilon];
    if numbers.iter().any(|x| !x.is_finite()) || demand.minsep < 0.0 || !(demand.service_epsilon > 0.0 && demand.service_epsilon < 1.0) {
        return Err(Malformed);
    }
    if demand.n_inst == 0 || p.pairs == 0 || p.window <= 0.0 || p.min_fidelity <= 0.0 {
        return Err(NonPositiveField);
    }
    if demand.expiry <= t_start {
        return Err(ExpiryBeforeStart);
    }
    Ok(())
}

/// Metadata checks, then one PGT per fidelity-feasible path (fastest first).
///
/// `next_pgt` is advanced once per created task.
pub fn register_demand(
    demand: &Demand,
    graph: &ResourceGraph,
    table: &CapabilitiesTable,
    t_start: f64,
    t_si: Nanos,
    config: &PgtConfig,
    next_pgt: &mut u64,
) -> Result<TaskAlternatives, RegistrationFailure> {
    metadata_check(demand, graph, table, t_start)?;
    let mut alternatives = Vec::new();
    for (path, entry) in table.feasible_paths(demand.meta.src, demand.meta.dst, demand.packet.min_fidelity) {
        if let Ok(pgt) = create_pgt(PgtId(*next_pgt), demand, path, &entry, t_si, t_start, config) {
            *next_pgt += 1;
            alternatives.push(pgt);
        }
    }
    if alternatives.is_empty() {
        return Err(RegistrationFailure::NoViablePgt);
    }
    Ok(alternatives)
}
