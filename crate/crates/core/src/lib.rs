//! Control-plane engine for a centrally scheduled entanglement network.
//!
//! The crate is split along the controller's applications:
//!
//! * [`network`] builds the resource graph, local areas, allowed paths and
//!   the disjoint path partition.
//! * [`capabilities`] holds the per-path rate/fidelity table.
//! * [`demand`] turns end-node demands into packet generation tasks.
//! * [`scheduler`] admits tasks and computes per-interval schedules.

pub mod capabilities;
pub mod demand;
pub mod network;
pub mod scheduler;
pub mod time;

pub use network::{ComponentId, ComponentKind, Path, ResourceGraph};
pub use time::Nanos;
