use std::collections::{BTreeSet, VecDeque};
use std::sync::{Arc, Mutex};

use super::buffer::{TaskAlternatives, TaskIntakeBuffer, TerminationBuffer};
use super::ledger::{Decision, DemandStatus, DemandStatusLedger, LedgerError};
use super::pgt::PgtConfig;
use super::registration::{register_demand, RegistrationFailure};
use super::types::{Demand, DemandId, Pgt, PgtId};
use crate::capabilities::CapabilitiesTable;
use crate::network::ResourceGraph;
use crate::time::Nanos;

/// Intake queue, registration worker, status ledger and both buffers.
#[derive(Debug, Default)]
pub struct DemandManager {
    queue: VecDeque<Demand>,
    pub ledger: DemandStatusLedger,
    intake: TaskIntakeBuffer,
    terminations: TerminationBuffer,
    pub pgt_config: PgtConfig,
    next_pgt: u64,
}

/// Manager shared between the registration producer and the scheduler.
pub type SharedDemandManager = Arc<Mutex<DemandManager>>;

/// Outcome of one registration attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationOutcome {
    pub demand: DemandId,
    pub result: Result<usize, RegistrationFailure>,
}

impl DemandManager {
    pub fn new(pgt_config: PgtConfig) -> Self {
        DemandManager { pgt_config, ..Default::default() }
    }

    pub fn into_shared(self) -> SharedDemandManager {
        Arc::new(Mutex::new(self))
    }

    pub fn submit(&mut self, demand: Demand) -> Result<(), LedgerError> {
        self.ledger.enqueue(demand.id)?;
        self.queue.push_back(demand);
        Ok(())
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Registers every queued demand in FIFO order with a single worker.
    pub fn register_queued(&mut self, graph: &ResourceGraph, table: &CapabilitiesTable, t_start: f64, t_si: Nanos) -> Vec<RegistrationOutcome> {
        let mut out = Vec::with_capacity(self.queue.len());
        while let Some(demand) = self.queue.pop_front() {
            let result = register_demand(&demand, graph, table, t_start, t_si, &self.pgt_config, &mut self.next_pgt);
            let (status, result) = match result {
                Ok(alternatives) => {
                    let n = alternatives.len();
                    self.intake.push(alternatives);
                    (DemandStatus::Registered, Ok(n))
                }
                Err(reason) => (DemandStatus::Failed { reason }, Err(reason)),
            };
            self.ledger.transition(demand.id, status).expect("queued demand");
            out.push(RegistrationOutcome { demand: demand.id, result });
        }
        out
    }

    pub fn read_intake(&mut self, max: Option<usize>) -> Vec<TaskAlternatives> {
        self.intake.read_and_flush(max)
    }

    pub fn pending_intake(&self) -> usize {
        self.intake.len()
    }

    pub fn request_termination(&mut self, pgt: PgtId) {
        self.terminations.push(pgt);
    }

    pub fn read_terminations(&mut self) -> BTreeSet<PgtId> {
        self.terminations.read_and_flush()
    }

    pub fn apply_decision(&mut self, id: DemandId, decision: Decision<'_>, service_epsilon: f64) -> Result<DemandStatus, LedgerError> {
        self.ledger.apply_decision(id, decision, service_epsilon)
    }

    pub fn accept(&mut self, pgt: &Pgt, service_epsilon: f64) -> Result<DemandStatus, LedgerError> {
        self.apply_decision(pgt.demand, Decision::Accept(pgt), service_epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capabilities::{generate_capabilities, CapabilityModel};
    use crate::demand::types::{DemandMeta, PacketSpec};
    use crate::network::{dumbbell, Dumbbell, NetworkModel};

    fn demand(id: u64, dst_k: u32) -> Demand {
        Demand {
            id: DemandId(id),
            packet: PacketSpec { window: 0.1, pairs: 1, min_fidelity: 0.5 },
            minsep: 0.0,
            expiry: 36_000.0,
            n_inst: 5,
            meta: DemandMeta { src: Dumbbell::end_node(0, 0), dst: Dumbbell::end_node(0, dst_k), capability_version: 1, session_id: id },
            service_epsilon: 0.01,
        }
    }

    #[test]
    fn register_then_decide() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let t = generate_capabilities(&m.graph, &m.partition, &CapabilityModel::default(), 1);
        let mut dm = DemandManager::new(PgtConfig::default());
        dm.submit(demand(1, 1)).unwrap();
        dm.submit(demand(2, 0)).unwrap();
        assert!(dm.submit(demand(1, 1)).is_err());
        let out = dm.register_queued(&m.graph, &t, 3600.0, 1_800_000_000_000);
        assert_eq!(out[0].result, Ok(1));
        assert_eq!(out[1].result, Err(RegistrationFailure::Malformed));
        let gamma = dm.read_intake(None);
        assert_eq!(gamma.len(), 1);
        dm.accept(&gamma[0][0], 0.01).unwrap();
        assert_eq!(dm.ledger.get(DemandId(1)).unwrap().name(), "accepted");
        dm.ledger.transition(DemandId(1), DemandStatus::Active).unwrap();
        dm.request_termination(gamma[0][0].id);
        assert_eq!(dm.read_terminations().len(), 1);
    }

    #[test]
    fn shared_across_threads() {
        let m = NetworkModel::build(dumbbell(), 1).unwrap();
        let t = generate_capabilities(&m.graph, &m.partition, &CapabilityModel::default(), 1);
        let shared = DemandManager::new(PgtConfig::default()).into_shared();
        let producer = {
            let shared = Arc::clone(&shared);
            std::thread::spawn(move || {
                for id in 0..20 {
                    shared.lock().unwrap().submit(demand(id, 1 + (id % 4) as u32)).unwrap();
                }
            })
        };
        producer.join().unwrap();
        let mut dm = shared.lock().unwrap();
        dm.register_queued(&m.graph, &t, 0.0, 1_800_000_000_000);
        let ids: Vec<u64> = dm.read_intake(None).iter().map(|g| g[0].demand.0).collect();
        assert_eq!(ids, (0..20).collect::<Vec<_>>());
    }
}
