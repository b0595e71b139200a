//! Admission, per-interval schedule computation and schedule checks.

mod admit;
mod bonus;
mod classes;
mod compile;
mod minimal;
mod required_time;
mod schedule;
mod update;
mod validate;

pub use admit::{admit_tasks, AdmitOutcome};
pub use bonus::{bonus_phase, round_robin_bonus, BonusStats};
pub use classes::{FillingClass, FillingClassError, FillingClassSet};
pub use compile::{compile_schedule, CompiledEntry, CompiledSchedule, ComponentSchedule, ScheduleStore};
pub use minimal::{direct_allocation, minimal_phase};
pub use required_time::{calculate_required_time, cycle_plan, required_time, TaskShape};
pub use schedule::{NetworkSchedule, Pga, ScheduledTask};
pub use update::{update_filling_classes, UpdateReport};
pub use validate::{validate_schedule, Conflict, MinsepViolation, ScheduleReport, Shortfall};

use std::time::{Duration, Instant};

use crate::time::Nanos;

/// Result of [`compute_schedule`] with per-phase wall-clock times.
#[derive(Debug, Clone)]
pub struct ComputedSchedule {
    pub schedule: NetworkSchedule,
    pub minimal_pgas: usize,
    pub bonus: BonusStats,
    pub minimal_time: Duration,
    pub bonus_time: Duration,
}

/// Minimal allocation phase followed by the optional bonus phase.
pub fn compute_schedule(
    classes: &FillingClassSet,
    t_si: Nanos,
    interval: u64,
    version: u64,
    bonus: bool,
    bonus_budget: Option<Duration>,
) -> ComputedSchedule {
    let mut schedule = NetworkSchedule::new(interval, version);
    let t0 = Instant::now();
    let minimal_pgas = minimal_phase(classes, &mut schedule);
    let t1 = Instant::now();
    let bonus = if bonus { bonus_phase(classes, &mut schedule, t_si, bonus_budget.map(|b| t1 + b)) } else { BonusStats::default() };
    let t2 = Instant::now();
    ComputedSchedule { schedule, minimal_pgas, bonus, minimal_time: t1 - t0, bonus_time: t2 - t1 }
}
