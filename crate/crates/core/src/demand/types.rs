use std::fmt;

use serde::{Deserialize, Serialize};

use crate::network::{ComponentId, Path};
use crate::time::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PgtId(pub u64);

impl fmt::Display for DemandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

impl fmt::Display for PgtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Entanglement packet: `pairs` pairs of fidelity at least `min_fidelity`
/// generated within `window` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub window: f64,
    pub pairs: u32,
    pub min_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandMeta {
    pub src: ComponentId,
    pub dst: ComponentId,
    pub capability_version: u64,
    pub session_id: u64,
}

/// A request for `n_inst` packets before `expiry` (absolute seconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    pub id: DemandId,
    pub packet: PacketSpec,
    pub minsep: f64,
    pub expiry: f64,
    pub n_inst: u64,
    pub meta: DemandMeta,
    pub service_epsilon: f64,
}

/// Packet generation task: the scheduled form of a demand on one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pgt {
    pub id: PgtId,
    pub demand: DemandId,
    /// Duration E of one packet generation attempt.
    pub duration: Nanos,
    pub p_packet: f64,
    /// PGAs per scheduling interval.
    pub min_alloc: u32,
    pub path: Path,
    pub minsep: Nanos,
    /// Absolute start of the first interval this task may be scheduled in.
    pub t_start: f64,
    pub t_expiry: f64,
}

impl Pgt {
    /// Schedulable resources: the path without its end nodes.
    pub fn resources(&self) -> &[ComponentId] {
        self.path.interior()
    }
}
