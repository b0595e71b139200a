//! PGT creation: choose the packet success probability that minimises load.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::allocation::{minimal_allocation, DEFAULT_ALLOCATION_CEILING};
use super::scan::duration_for_probability;
use super::types::{Demand, Pgt, PgtId};
use crate::capabilities::CapabilityEntry;
use crate::network::Path;
use crate::time::{nanos_to_secs, secs_to_nanos, Nanos};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PgtConfig {
    /// Candidate packet success probabilities.
    pub p_grid: Vec<f64>,
    /// Upper bound on the attempt period; shortened so that each attempt
    /// succeeds with probability at most one half.
    pub attempt_period_s: f64,
    pub allocation_ceiling: u32,
}

impl Default for PgtConfig {
    fn default() -> Self {
        PgtConfig { p_grid: (1..=19).map(|i| f64::from(i) / 20.0).collect(), attempt_period_s: 0.01, allocation_ceiling: DEFAULT_ALLOCATION_CEILING }
    }
}

impl PgtConfig {
    /// Attempt period in nanoseconds for a path of the given rate.
    pub fn attempt_period(&self, rate: f64) -> Nanos {
        let cap = if rate > 0.0 { 0.5 / rate } else { f64::INFINITY };
        secs_to_nanos(self.attempt_period_s.min(cap)).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PgtError {
    #[error("no candidate success probability gives a viable task")]
    NoViable,
}

/// One evaluated point of the candidate grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub p_packet: f64,
    pub duration: Nanos,
    pub min_alloc: u32,
}

impl Candidate {
    /// Time the task occupies per interval: l * (E + minsep).
    pub fn load(&self, minsep: Nanos) -> i128 {
        i128::from(self.min_alloc) * i128::from(self.duration + minsep)
    }
}

/// Least-load candidate; ties go to the shorter PGA.
pub fn select_candidate(candidates: &[Candidate], minsep: Nanos) -> Option<Candidate> {
    candidates.iter().copied().min_by(|a, b| a.load(minsep).cmp(&b.load(minsep)).then(a.duration.cmp(&b.duration)))
}

/// Number of intervals between `t_start` and `expiry`, at least one.
pub fn intervals_until(expiry: f64, t_start: f64, t_si: f64) -> u64 {
    (((expiry - t_start) / t_si - 1e-9).ceil() as u64).max(1)
}

/// Evaluates the candidate grid for one demand on one path.
pub fn candidates(demand: &Demand, entry: &CapabilityEntry, t_si: Nanos, t_start: f64, config: &PgtConfig) -> Vec<Candidate> {
    let tau = config.attempt_period(entry.rate);
    let n_si = intervals_until(demand.expiry, t_start, nanos_to_secs(t_si));
    config
        .p_grid
        .iter()
        .filter_map(|&p| {
            let duration = duration_for_probability(p, entry.rate, demand.packet.window, demand.packet.pairs, tau, t_si)?;
            let min_alloc = minimal_allocation(p, demand.n_inst, n_si, demand.service_epsilon, config.allocation_ceiling).ok()?;
            Some(Candidate { p_packet: p, duration, min_alloc })
        })
        .collect()
}

/// Builds the PGT for `demand` on `path`, or reports that none is viable.
pub fn create_pgt(
    id: PgtId,
    demand: &Demand,
    path: &Path,
    entry: &CapabilityEntry,
    t_si: Nanos,
    t_start: f64,
    config: &PgtConfig,
) -> Result<Pgt, PgtError> {
    let minsep = secs_to_nanos(demand.minsep);
    let best = select_candidate(&candidates(demand, entry, t_si, t_start, config), minsep).ok_or(PgtError::NoViable)?;
    if best.duration > t_si {
        return Err(PgtError::NoViable);
    }
    Ok(Pgt {
        id,
        demand: demand.id,
        duration: best.duration,
        p_packet: best.p_packet,
        min_alloc: best.min_alloc,
        path: path.clone(),
        minsep,
        t_start,
        t_expiry: demand.expiry,
    })
}
