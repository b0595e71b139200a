//! Per-interval and per-demand records and their aggregates.

use std::io::Write;

use qnet_core::demand::DemandId;
use serde::{Deserialize, Serialize};

use crate::assign::CellKind;

/// One row of metrics.csv.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub seed: u64,
    pub interval: u64,
    pub active_pgt_count: usize,
    pub demands_submitted: usize,
    pub registered: usize,
    pub failed: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub satisfied: usize,
    pub expired: usize,
    pub pgas_minimal: usize,
    pub pgas_bonus: usize,
    pub good_accounting_s: f64,
    pub t_update: f64,
    pub t_admit: f64,
    pub t_minimal: f64,
    pub t_bonus: f64,
    pub t_compile: f64,
    pub violations: usize,
}

impl IntervalRecord {
    /// Time to produce the network schedule for this interval.
    pub fn schedule_time(&self) -> f64 {
        self.t_update + self.t_admit + self.t_minimal + self.t_bonus + self.t_compile
    }

    /// The record with all wall-clock fields zeroed.
    pub fn without_timings(&self) -> IntervalRecord {
        IntervalRecord { t_update: 0.0, t_admit: 0.0, t_minimal: 0.0, t_bonus: 0.0, t_compile: 0.0, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Satisfied,
    Expired,
}

/// Final record of an accepted demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandRecord {
    pub demand: DemandId,
    pub app: String,
    pub kind: CellKind,
    pub accept_time: f64,
    pub t_start: f64,
    pub t_expiry: f64,
    pub outcome: Outcome,
    pub outcome_time: f64,
    pub minimal_service: bool,
    pub service_to_expiry_fraction: f64,
    pub successes: u64,
    pub pgas_executed: u64,
    pub min_alloc: u32,
}

/// Invariant checks on computed schedules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    pub good_accounting: usize,
    pub conflicts: usize,
    pub minsep: usize,
    pub shortfalls: usize,
    pub out_of_interval: usize,
    pub malformed: usize,
    pub checked_schedules: usize,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.good_accounting + self.conflicts + self.minsep + self.shortfalls + self.out_of_interval + self.malformed
    }

    pub fn add(&mut self, other: &Violations) {
        self.good_accounting += other.good_accounting;
        self.conflicts += other.conflicts;
        self.minsep += other.minsep;
        self.shortfalls += other.shortfalls;
        self.out_of_interval += other.out_of_interval;
        self.malformed += other.malformed;
        self.checked_schedules += other.checked_schedules;
    }
}

/// JSON-lines event log entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seed: u64,
    pub t: f64,
    pub demand_id: DemandId,
    pub event: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Everything recorded during one seeded run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub seed: u64,
    pub sources: usize,
    pub intervals: Vec<IntervalRecord>,
    pub demands: Vec<DemandRecord>,
    pub events: Vec<Event>,
    pub violations: Violations,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    ratio(sum, n as f64)
}

/// Aggregate statistics of one or more runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub sources: usize,
    pub submitted: usize,
    pub registered: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub completed: usize,
    pub minimal_service: usize,
    pub minimal_service_proportion: Option<f64>,
    pub acceptance_proportion: Option<f64>,
    pub registration_proportion: Option<f64>,
    pub mean_service_to_expiry: Option<f64>,
    pub pgas_minimal: usize,
    pub pgas_bonus: usize,
    pub bonus_proportion: Option<f64>,
    pub mean_active_pgts: f64,
    pub mean_schedule_time_s: f64,
    pub max_schedule_time_s: f64,
    pub mean_t_update: f64,
    pub mean_t_admit: f64,
    pub mean_t_minimal: f64,
    pub mean_t_bonus: f64,
    pub mean_t_compile: f64,
    pub violations: Violations,
}

impl Summary {
    /// Pools all runs: proportions are over the pooled counts.
    pub fn of<'a>(runs: impl IntoIterator<Item = &'a ScenarioMetrics>) -> Summary {
        let runs: Vec<&ScenarioMetrics> = runs.into_iter().collect();
        let rows = || runs.iter().flat_map(|r| r.intervals.iter());
        let demands = || runs.iter().flat_map(|r| r.demands.iter());
        let sum = |f: fn(&IntervalRecord) -> usize| rows().map(f).sum::<usize>();
        let mut s = Summary {
            runs: runs.len(),
            sources: runs.iter().map(|r| r.sources).sum(),
            submitted: sum(|r| r.demands_submitted),
            registered: sum(|r| r.registered),
            accepted: sum(|r| r.accepted),
            rejected: sum(|r| r.rejected),
            completed: demands().count(),
            minimal_service: demands().filter(|d| d.minimal_service).count(),
            pgas_minimal: sum(|r| r.pgas_minimal),
            pgas_bonus: sum(|r| r.pgas_bonus),
            ..Summary::default()
        };
        s.minimal_service_proportion = ratio(s.minimal_service as f64, s.completed as f64);
        s.acceptance_proportion = ratio(s.accepted as f64, s.submitted as f64);
        s.registration_proportion = ratio(s.registered as f64, s.submitted as f64);
        s.mean_service_to_expiry = mean(demands().map(|d| d.service_to_expiry_fraction));
        s.bonus_proportion = ratio(s.pgas_bonus as f64, (s.pgas_minimal + s.pgas_bonus) as f64);
        s.mean_active_pgts = mean(rows().map(|r| r.active_pgt_count as f64)).unwrap_or(0.0);
        s.mean_schedule_time_s = mean(rows().map(IntervalRecord::schedule_time)).unwrap_or(0.0);
        s.max_schedule_time_s = rows().map(IntervalRecord::schedule_time).fold(0.0, f64::max);
        s.mean_t_update = mean(rows().map(|r| r.t_update)).unwrap_or(0.0);
        s.mean_t_admit = mean(rows().map(|r| r.t_admit)).unwrap_or(0.0);
        s.mean_t_minimal = mean(rows().map(|r| r.t_minimal)).unwrap_or(0.0);
        s.mean_t_bonus = mean(rows().map(|r| r.t_bonus)).unwrap_or(0.0);
        s.mean_t_compile = mean(rows().map(|r| r.t_compile)).unwrap_or(0.0);
        for r in &runs {
            s.violations.add(&r.violations);
        }
        s
    }
}

/// Result of [`crate::run_scenario`]: per-seed metrics plus pooled summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub epsilon_service: f64,
    pub bonus_enabled: bool,
    pub horizon_intervals: u64,
    pub summary: Summary,
    pub per_seed: Vec<(u64, Summary)>,
    #[serde(skip)]
    pub runs: Vec<ScenarioMetrics>,
}

impl ScenarioReport {
    pub fn new(cfg: &crate::ScenarioConfig, runs: Vec<ScenarioMetrics>) -> Self {
        ScenarioReport {
            epsilon_service: cfg.epsilon_service,
            bonus_enabled: cfg.bonus_enabled,
            horizon_intervals: cfg.horizon_intervals,
            summary: Summary::of(&runs),
            per_seed: runs.iter().map(|r| (r.seed, Summary::of([r]))).collect(),
            runs,
        }
    }

    pub fn write_metrics_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.runs.iter().flat_map(|r| r.intervals.iter()) {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_events_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in self.runs.iter().flat_map(|r| r.events.iter()) {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_summary_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(out, self)
    }

    /// Writes metrics.csv, summary.json and events.jsonl into `dir`.
    pub fn write_all(&self, dir: &std::path::Path) -> std::io::Result<()> {
        use std::fs::File;
        use std::io::BufWriter;
        std::fs::create_dir_all(dir)?;
        self.write_metrics_csv(BufWriter::new(File::create(dir.join("metrics.csv"))?)).map_err(std::io::Error::other)?;
        self.write_summary_json(BufWriter::new(File::create(dir.join("summary.json"))?))?;
        self.write_events_jsonl(BufWriter::new(File::create(dir.join("events.jsonl"))?))?;
        Ok(())
    }
}
