//! Interval-by-interval simulation of the controller and the network.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use qnet_core::capabilities::{generate_capabilities, CapabilitiesTable};
use qnet_core::demand::{candidates, Decision, Demand, DemandId, DemandManager, DemandMeta, DemandStatus, PacketSpec, Pgt, PgtId};
use qnet_core::network::{dumbbell, random_topology, NetworkModel, ResourceGraph, TopologyFile, TopologyParams};
use qnet_core::scheduler::{
    admit_tasks, compile_schedule, compute_schedule, update_filling_classes, validate_schedule, CompiledSchedule, FillingClassSet,
};
use qnet_core::time::{nanos_to_secs, Nanos};
use qnet_core::ComponentId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::assign::{assign_applications, node_profiles, DemandSource};
use crate::catalog::ApplicationSpec;
use crate::config::{ScenarioConfig, TopologySpec};
use crate::execute::execute_pgas;
use crate::metrics::{DemandRecord, Event, IntervalRecord, Outcome, ScenarioMetrics, Violations};

/// Intervals between computing a schedule and executing it.
pub const OFFSET_INTERVALS: u64 = 2;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("topology: {0}")]
    Topology(String),
    #[error("cannot read topology file {path}: {message}")]
    TopologyFile { path: String, message: String },
}

/// Named random streams derived from one run seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Topology = 1,
    Capabilities = 2,
    Assignment = 3,
    Traffic = 4,
    Execution = 5,
}

fn stream(seed: u64, s: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}

/// Whether some feasible path between `src` and `dst` yields a PGT for a
/// fresh demand of `app`.
pub fn app_viable(table: &CapabilitiesTable, cfg: &ScenarioConfig, t_si: Nanos, app: &ApplicationSpec, src: ComponentId, dst: ComponentId) -> bool {
    let t_start = OFFSET_INTERVALS as f64 * cfg.t_si_seconds;
    let demand = Demand {
        id: DemandId(0),
        packet: PacketSpec { window: app.window, pairs: app.pairs, min_fidelity: app.min_fidelity },
        minsep: app.minsep,
        expiry: app.expiry_rel,
        n_inst: app.n_inst,
        meta: DemandMeta { src, dst, capability_version: table.version, session_id: 0 },
        service_epsilon: cfg.epsilon_service,
    };
    table
        .feasible_paths(src, dst, app.min_fidelity)
        .into_iter()
        .any(|(_, entry)| candidates(&demand, &entry, t_si, t_start, &cfg.pgt).iter().any(|c| c.duration <= t_si))
}

pub fn build_graph(spec: &TopologySpec, seed: u64) -> Result<ResourceGraph, SimError> {
    match spec {
        TopologySpec::Dumbbell => Ok(dumbbell()),
        TopologySpec::Random { backbones, local_areas, end_nodes, seed: fixed } => {
            let params = TopologyParams { backbones: *backbones, local_areas: *local_areas, end_nodes: *end_nodes };
            let topo_seed = fixed.unwrap_or_else(|| stream(seed, Stream::Topology).random());
            random_topology(params, topo_seed).map_err(|e| SimError::Topology(e.to_string()))
        }
        TopologySpec::File { path } => {
            let err = |message: String| SimError::TopologyFile { path: path.display().to_string(), message };
            let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
            let file: TopologyFile = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
            ResourceGraph::try_from(file).map_err(|e| err(e.to_string()))
        }
    }
}

/// Execution plan for one interval: per task, its PGA starts.
#[derive(Debug, Clone)]
struct PlannedInterval {
    interval: u64,
    tasks: Vec<(Pgt, Vec<Nanos>)>,
}

#[derive(Debug, Clone)]
struct LiveDemand {
    source: usize,
    demand: Demand,
    accepted: Option<(f64, Pgt)>,
    active: bool,
    successes: u64,
    pgas_executed: u64,
}

/// Full controller and network state of one seeded run.
pub struct Simulation {
    cfg: ScenarioConfig,
    seed: u64,
    pub model: NetworkModel,
    pub table: CapabilitiesTable,
    pub sources: Vec<DemandSource>,
    manager: DemandManager,
    classes: Option<FillingClassSet>,
    plan: VecDeque<PlannedInterval>,
    live: BTreeMap<DemandId, LiveDemand>,
    traffic: ChaCha8Rng,
    execution: ChaCha8Rng,
    interval: u64,
    next_demand: u64,
    t_si: Nanos,
    pub metrics: ScenarioMetrics,
    last_schedule: Option<CompiledSchedule>,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Result<Self, SimError> {
        let graph = build_graph(&cfg.topology, seed)?;
        let model = NetworkModel::build(graph, 1).map_err(|e| SimError::Topology(e.to_string()))?;
        let table = generate_capabilities(&model.graph, &model.partition, &cfg.capabilities, stream(seed, Stream::Capabilities).random());
        let mut assignment = stream(seed, Stream::Assignment);
        let profiles = node_profiles(&model.graph, &cfg.platforms, cfg.server_probability, &mut assignment);
        let t_si = cfg.t_si_ns();
        let viable = |app: &ApplicationSpec, src, dst| app_viable(&table, cfg, t_si, app, src, dst);
        let sources = assign_applications(&model.partition, &profiles, &cfg.platforms, &cfg.fractions, &cfg.applications, viable, &mut assignment);
        Ok(Self::with_sources(cfg, seed, model, table, sources))
    }

    /// Starts a run from explicit parts; initial submission times are drawn here.
    pub fn with_sources(cfg: &ScenarioConfig, seed: u64, model: NetworkModel, table: CapabilitiesTable, mut sources: Vec<DemandSource>) -> Self {
        let mut traffic = stream(seed, Stream::Traffic);
        let first_start = OFFSET_INTERVALS as f64 * cfg.t_si_seconds;
        for s in &mut sources {
            let window = cfg.initial_window_s.unwrap_or(first_start + s.app.expiry_rel);
            s.next_submit = traffic.random_range(0.0..window);
            s.active_demand = None;
        }
        let classes = FillingClassSet::new(&model.partition, &model.xi);
        let metrics = ScenarioMetrics { seed, sources: sources.len(), ..Default::default() };
        Simulation {
            cfg: cfg.clone(),
            seed,
            model,
            table,
            sources,
            manager: DemandManager::new(cfg.pgt.clone()),
            classes: Some(classes),
            plan: VecDeque::new(),
            live: BTreeMap::new(),
            traffic,
            execution: stream(seed, Stream::Execution),
            interval: 0,
            next_demand: 0,
            t_si: cfg.t_si_ns(),
            metrics,
            last_schedule: None,
        }
    }

    pub fn interval(&self) -> u64 {
        self.interval
    }

    pub fn classes(&self) -> &FillingClassSet {
        self.classes.as_ref().expect("classes present between steps")
    }

    /// Adds a source mid-run; it first submits at `first_submit`.
    pub fn add_source(&mut self, mut source: DemandSource, first_submit: f64) {
        source.next_submit = first_submit;
        source.active_demand = None;
        self.sources.push(source);
        self.metrics.sources = self.sources.len();
    }

    fn event(&mut self, t: f64, demand: DemandId, event: &str, reason: Option<String>) {
        self.metrics.events.push(Event { seed: self.seed, t, demand_id: demand, event: event.to_string(), reason });
    }

    /// Frees the source and draws its next submission time.
    fn release_source(&mut self, source: usize, at: f64) {
        let mean = self.sources[source].app.resubmit_mean;
        let gap = Exp::new(1.0 / mean).expect("positive mean").sample(&mut self.traffic);
        let s = &mut self.sources[source];
        s.active_demand = None;
        s.next_submit = at + gap;
    }

    fn finish(&mut self, id: DemandId, outcome: Outcome, at: f64) {
        let d = self.live.remove(&id).expect("live demand");
        let (accept_time, pgt) = d.accepted.expect("accepted demand");
        let status = match outcome {
            Outcome::Satisfied => DemandStatus::Satisfied,
            Outcome::Expired => DemandStatus::Expired,
        };
        if !d.active {
            self.manager.ledger.transition(id, DemandStatus::Active).expect("accepted demand activates");
        }
        self.manager.ledger.transition(id, status).expect("active demand finishes");
        if outcome == Outcome::Satisfied {
            self.manager.request_termination(pgt.id);
        }
        let span = pgt.t_expiry - pgt.t_start;
        let fraction = if span > 0.0 { ((at - pgt.t_start) / span).clamp(0.0, 1.0) } else { 1.0 };
        self.metrics.demands.push(DemandRecord {
            demand: id,
            app: self.sources[d.source].app.name.clone(),
            kind: self.sources[d.source].kind,
            accept_time,
            t_start: pgt.t_start,
            t_expiry: pgt.t_expiry,
            outcome,
            outcome_time: at,
            minimal_service: d.successes >= d.demand.n_inst,
            service_to_expiry_fraction: fraction,
            successes: d.successes,
            pgas_executed: d.pgas_executed,
            min_alloc: pgt.min_alloc,
        });
        let name = match outcome {
            Outcome::Satisfied => "satisfied",
            Outcome::Expired => "expired",
        };
        self.event(at, id, name, None);
        self.release_source(d.source, at);
    }

    /// Advances one scheduling interval.
    pub fn step_interval(&mut self) -> IntervalRecord {
        let k = self.interval;
        let t_si_s = self.cfg.t_si_seconds;
        let t0 = k as f64 * t_si_s;
        let t1 = t0 + t_si_s;
        let t_start = t0 + OFFSET_INTERVALS as f64 * t_si_s;
        let mut rec = IntervalRecord { seed: self.seed, interval: k, ..Default::default() };

        // Submissions due in this interval.
        for i in 0..self.sources.len() {
            let s = &self.sources[i];
            if s.active_demand.is_some() || s.next_submit >= t1 {
                continue;
            }
            let id = DemandId(self.next_demand);
            self.next_demand += 1;
            let app = &s.app;
            let demand = Demand {
                id,
                packet: PacketSpec { window: app.window, pairs: app.pairs, min_fidelity: app.min_fidelity },
                minsep: app.minsep,
                expiry: t0 + app.expiry_rel,
                n_inst: app.n_inst,
                meta: DemandMeta { src: s.src, dst: s.dst, capability_version: self.table.version, session_id: i as u64 },
                service_epsilon: self.cfg.epsilon_service,
            };
            self.sources[i].active_demand = Some(id);
            self.manager.submit(demand.clone()).expect("fresh demand id");
            self.live.insert(id, LiveDemand { source: i, demand, accepted: None, active: false, successes: 0, pgas_executed: 0 });
            rec.demands_submitted += 1;
            self.event(t0, id, "submitted", None);
        }
        for o in self.manager.register_queued(&self.model.graph, &self.table, t_start, self.t_si) {
            match o.result {
                Ok(_) => {
                    rec.registered += 1;
                    self.event(t0, o.demand, "registered", None);
                }
                Err(reason) => {
                    rec.failed += 1;
                    let source = self.live.remove(&o.demand).expect("live demand").source;
                    self.event(t0, o.demand, "failed", Some(serde_json::to_value(reason).unwrap().as_str().unwrap_or("").to_string()));
                    self.release_source(source, t0);
                }
            }
        }

        // Scheduler: update, admit, compute.
        let terminations = self.manager.read_terminations();
        let timer = Instant::now();
        let (mut classes, _) = update_filling_classes(
            self.classes.take().expect("classes present"),
            &terminations,
            &self.model.partition,
            &self.model.xi,
            t_start,
            self.t_si,
            &mut |_| Vec::new(),
        );
        rec.t_update = timer.elapsed().as_secs_f64();

        let intake = self.manager.read_intake(None);
        let timer = Instant::now();
        let outcome = admit_tasks(intake, &mut classes, self.t_si);
        rec.t_admit = timer.elapsed().as_secs_f64();
        for pgt in outcome.accepted {
            self.manager.accept(&pgt, self.cfg.epsilon_service).expect("registered demand");
            rec.accepted += 1;
            self.event(t0, pgt.demand, "accepted", None);
            let demand = pgt.demand;
            self.live.get_mut(&demand).expect("live demand").accepted = Some((t0, pgt));
        }
        for id in outcome.rejected {
            self.manager.apply_decision(id, Decision::Reject, self.cfg.epsilon_service).expect("registered demand");
            rec.rejected += 1;
            self.event(t0, id, "rejected", Some("scheduler_reject".into()));
            let source = self.live.remove(&id).expect("live demand").source;
            self.release_source(source, t0);
        }

        let budget = self.cfg.bonus_budget_s.map(Duration::from_secs_f64);
        let computed = compute_schedule(&classes, self.t_si, k + OFFSET_INTERVALS, self.table.version, self.cfg.bonus_enabled, budget);
        rec.t_minimal = computed.minimal_time.as_secs_f64();
        rec.t_bonus = computed.bonus_time.as_secs_f64();
        let timer = Instant::now();
        let compiled = compile_schedule(&computed.schedule);
        rec.t_compile = timer.elapsed().as_secs_f64();
        rec.pgas_minimal = computed.minimal_pgas;
        rec.pgas_bonus = computed.bonus.pgas_added;
        rec.active_pgt_count = classes.task_count();
        let ga = classes.good_accounting();
        rec.good_accounting_s = nanos_to_secs(ga);

        if self.cfg.check_invariants {
            let tasks: Vec<Pgt> = classes.tasks().cloned().collect();
            let required: BTreeSet<PgtId> = tasks.iter().map(|t| t.id).collect();
            let report = validate_schedule(&compiled, &tasks, &required, self.t_si);
            let v = Violations {
                good_accounting: usize::from(ga > self.t_si),
                conflicts: report.conflicts.len(),
                minsep: report.minsep_violations.len(),
                shortfalls: report.shortfalls.len(),
                out_of_interval: usize::from(!report.within_interval),
                malformed: report.misaligned.len() + report.bad_lengths.len() + report.unknown.len(),
                checked_schedules: 1,
            };
            rec.violations = v.total();
            self.metrics.violations.add(&v);
        }

        self.last_schedule = Some(compiled);

        let tasks = classes
            .tasks()
            .filter_map(|t| {
                let starts: Vec<Nanos> = computed.schedule.starts(t.id).collect();
                (!starts.is_empty()).then(|| (t.clone(), starts))
            })
            .collect();
        self.plan.push_back(PlannedInterval { interval: k + OFFSET_INTERVALS, tasks });
        self.classes = Some(classes);

        // Execute the schedule computed OFFSET_INTERVALS ago.
        if let Some(planned) = self.plan.pop_front_if(|p| p.interval == k) {
            for (pgt, starts) in planned.tasks {
                let Some(d) = self.live.get_mut(&pgt.demand) else { continue };
                if !d.accepted.as_ref().is_some_and(|(_, p)| p.id == pgt.id) {
                    continue;
                }
                if !d.active {
                    d.active = true;
                    self.manager.ledger.transition(pgt.demand, DemandStatus::Active).expect("accepted demand activates");
                }
                let d = self.live.get_mut(&pgt.demand).unwrap();
                // Only PGAs that end by the expiry count.
                let usable = starts.iter().take_while(|&&s| t0 + nanos_to_secs(s + pgt.duration) <= pgt.t_expiry + 1e-9).count();
                let remaining = d.demand.n_inst.saturating_sub(d.successes);
                let run = execute_pgas(usable, pgt.p_packet, remaining, &mut self.execution);
                d.successes += run.successes;
                d.pgas_executed += run.completed_at.map_or(usable, |i| i + 1) as u64;
                if let Some(i) = run.completed_at {
                    let at = t0 + nanos_to_secs(starts[i] + pgt.duration);
                    rec.satisfied += 1;
                    self.finish(pgt.demand, Outcome::Satisfied, at);
                }
            }
        }
        let expired: Vec<(DemandId, f64)> =
            self.live.iter().filter_map(|(&id, d)| d.accepted.as_ref().filter(|(_, p)| p.t_expiry <= t1).map(|(_, p)| (id, p.t_expiry))).collect();
        for (id, at) in expired {
            rec.expired += 1;
            self.finish(id, Outcome::Expired, at);
        }
        self.manager.ledger.prune_final();

        self.interval += 1;
        self.metrics.intervals.push(rec.clone());
        rec
    }

    pub fn run(mut self, intervals: u64) -> ScenarioMetrics {
        for _ in 0..intervals {
            self.step_interval();
        }
        self.metrics
    }

    /// Scheduled PGA count per task in the most recently computed schedule.
    pub fn latest_counts(&self) -> BTreeMap<PgtId, usize> {
        self.plan.back().map(|p| p.tasks.iter().map(|(t, s)| (t.id, s.len())).collect()).unwrap_or_default()
    }

    /// The schedule computed in the latest step, with the tasks it serves.
    pub fn latest_schedule(&self) -> Option<(&CompiledSchedule, Vec<Pgt>)> {
        self.last_schedule.as_ref().map(|s| (s, self.active_tasks()))
    }

    /// Accepted tasks that are still live.
    pub fn active_tasks(&self) -> Vec<Pgt> {
        self.classes().tasks().cloned().collect()
    }
}
