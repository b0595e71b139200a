//! Scenario harness for the qnet controller: application assignment,
//! demand traffic, mocked schedule execution, metrics and benchmarks.

pub mod assign;
pub mod bench;
pub mod catalog;
pub mod config;
pub mod engine;
pub mod execute;
pub mod fit;
pub mod metrics;

pub use config::{ConfigError, ScenarioConfig, TopologySpec};
pub use engine::{SimError, Simulation, OFFSET_INTERVALS};
pub use metrics::{ScenarioMetrics, ScenarioReport, Summary};

/// Runs one seed for the configured horizon.
pub fn run_seed(cfg: &ScenarioConfig, seed: u64) -> Result<ScenarioMetrics, SimError> {
    Ok(Simulation::new(cfg, seed)?.run(cfg.horizon_intervals))
}

/// Runs every seed one after another.
pub fn run_seeds_sequential(cfg: &ScenarioConfig, seeds: &[u64]) -> Result<Vec<ScenarioMetrics>, SimError> {
    seeds.iter().map(|&s| run_seed(cfg, s)).collect()
}

/// Runs seeds on the rayon pool; results keep the seed order.
#[cfg(feature = "parallel")]
pub fn run_seeds_parallel(cfg: &ScenarioConfig, seeds: &[u64]) -> Result<Vec<ScenarioMetrics>, SimError> {
    use rayon::prelude::*;
    seeds.par_iter().map(|&s| run_seed(cfg, s)).collect()
}

/// Runs `seeds` (independent universes) and pools their metrics.
pub fn run_scenario(cfg: &ScenarioConfig, seeds: &[u64]) -> Result<ScenarioReport, SimError> {
    #[cfg(feature = "parallel")]
    let runs = run_seeds_parallel(cfg, seeds)?;
    #[cfg(not(feature = "parallel"))]
    let runs = run_seeds_sequential(cfg, seeds)?;
    Ok(ScenarioReport::new(cfg, runs))
}
