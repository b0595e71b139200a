//! Demand intake, PGT creation and the status ledger.

mod allocation;
mod buffer;
mod ledger;
mod manager;
mod pgt;
mod registration;
pub mod scan;
mod types;

pub use allocation::{minimal_allocation, AllocationError, DEFAULT_ALLOCATION_CEILING};
pub use buffer::{TaskAlternatives, TaskIntakeBuffer, TerminationBuffer};
pub use ledger::{Decision, DemandStatus, DemandStatusLedger, LedgerError, RejectReason, ServiceAgreement};
pub use manager::{DemandManager, RegistrationOutcome, SharedDemandManager};
pub use pgt::{candidates, create_pgt, intervals_until, select_candidate, Candidate, PgtConfig, PgtError};
pub use registration::{register_demand, RegistrationFailure};
pub use scan::{packet_success_probability, ScanError};
pub use types::*;
