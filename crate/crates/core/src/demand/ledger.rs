use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::registration::RegistrationFailure;
use super::types::{DemandId, Pgt, PgtId};

/// Terms promised to an accepted demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceAgreement {
    pub pgt: PgtId,
    pub min_alloc: u32,
    pub t_start: f64,
    pub t_expiry: f64,
    pub service_epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    SchedulerReject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DemandStatus {
    Queued,
    Registered,
    Accepted { agreement: ServiceAgreement },
    Rejected { reason: RejectReason },
    Failed { reason: RegistrationFailure },
    Active,
    Satisfied,
    Expired,
    Terminated,
    Removed,
}

impl DemandStatus {
    pub fn name(&self) -> &'static str {
        match self {
            DemandStatus::Queued => "queued",
            DemandStatus::Registered => "registered",
            DemandStatus::Accepted { .. } => "accepted",
            DemandStatus::Rejected { .. } => "rejected",
            DemandStatus::Failed { .. } => "failed",
            DemandStatus::Active => "active",
            DemandStatus::Satisfied => "satisfied",
            DemandStatus::Expired => "expired",
            DemandStatus::Terminated => "terminated",
            DemandStatus::Removed => "removed",
        }
    }

    fn may_become(&self, next: &DemandStatus) -> bool {
        use DemandStatus::*;
        matches!(
            (self, next),
            (Queued, Registered | Failed { .. })
                | (Registered, Accepted { .. } | Rejected { .. })
                | (Accepted { .. }, Active)
                | (Active, Satisfied | Expired | Terminated | Removed)
        )
    }

    pub fn is_final(&self) -> bool {
        matches!(
            self,
            DemandStatus::Rejected { .. }
                | DemandStatus::Failed { .. }
                | DemandStatus::Satisfied
                | DemandStatus::Expired
                | DemandStatus::Terminated
                | DemandStatus::Removed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("demand {0} is not in the ledger")]
    Unknown(DemandId),
    #[error("demand {0} is already in the ledger")]
    Duplicate(DemandId),
    #[error("demand {id}: illegal transition {from} -> {to}")]
    IllegalTransition { id: DemandId, from: &'static str, to: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision<'a> {
    Accept(&'a Pgt),
    Reject,
}

/// Status of every demand seen by the controller.
#[derive(Debug, Clone, Default)]
pub struct DemandStatusLedger {
    statuses: BTreeMap<DemandId, DemandStatus>,
}

impl DemandStatusLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn enqueue(&mut self, id: DemandId) -> Result<(), LedgerError> {
        if self.statuses.contains_key(&id) {
            return Err(LedgerError::Duplicate(id));
        }
        self.statuses.insert(id, DemandStatus::Queued);
        Ok(())
    }

    pub fn get(&self, id: DemandId) -> Option<&DemandStatus> {
        self.statuses.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (DemandId, &DemandStatus)> {
        self.statuses.iter().map(|(&id, s)| (id, s))
    }

    pub fn len(&self) -> usize {
        self.statuses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statuses.is_empty()
    }

    pub fn transition(&mut self, id: DemandId, next: DemandStatus) -> Result<(), LedgerError> {
        let current = self.statuses.get_mut(&id).ok_or(LedgerError::Unknown(id))?;
        if !current.may_become(&next) {
            return Err(LedgerError::IllegalTransition { id, from: current.name(), to: next.name() });
        }
        *current = next;
        Ok(())
    }

    /// Records a scheduler decision for a registered demand.
    pub fn apply_decision(&mut self, id: DemandId, decision: Decision<'_>, service_epsilon: f64) -> Result<DemandStatus, LedgerError> {
        let next = match decision {
            Decision::Accept(pgt) => DemandStatus::Accepted {
                agreement: ServiceAgreement { pgt: pgt.id, min_alloc: pgt.min_alloc, t_start: pgt.t_start, t_expiry: pgt.t_expiry, service_epsilon },
            },
            Decision::Reject => DemandStatus::Rejected { reason: RejectReason::SchedulerReject },
        };
        self.transition(id, next.clone())?;
        Ok(next)
    }

    /// Drops demands in a final state; returns how many were removed.
    pub fn prune_final(&mut self) -> usize {
        let before = self.statuses.len();
        self.statuses.retain(|_, s| !s.is_final());
        before - self.statuses.len()
    }
}
