use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qnet_core::demand::Pgt;
use qnet_core::network::{dumbbell, random_topology, TopologyFile, TopologyParams};
use qnet_core::scheduler::{validate_schedule, CompiledSchedule};
use qnet_core::time::secs_to_nanos;
use qnet_sim::bench::{bench_admit, bench_schedule, stress_grid, BenchmarkPoint, Phase};
use qnet_sim::fit::{loglog_slope, polyfit, PolyFit};
use qnet_sim::{run_scenario, ScenarioConfig, Simulation};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qnet", version, about = "Scenario runs, benchmarks and schedule validation for the qnet scheduler")]
struct Cli {
    /// Seed for everything random; replaces the configured seed list in `run`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write metrics, summary and events.
    Run(RunArgs),
    /// Write a topology file.
    GenTopology(TopologyArgs),
    /// Time admission for every (N, k) pair.
    BenchAdmit(AdmitArgs),
    /// Time schedule computation on the stress set.
    BenchSchedule(ScheduleArgs),
    /// Check a compiled schedule against its tasks.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// `key.path=value`, applied before validation. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Also write the last schedule of the first seed (schedule.json, pgts.json).
    #[arg(long)]
    export_schedule: bool,
}

#[derive(Args)]
struct TopologyArgs {
    /// Emit the fixed dumbbell instead of a random topology.
    #[arg(long, conflicts_with_all = ["backbones", "local_areas", "end_nodes"])]
    dumbbell: bool,
    #[arg(long, default_value_t = 2)]
    backbones: usize,
    #[arg(long, default_value_t = 3)]
    local_areas: usize,
    #[arg(long, default_value_t = 30)]
    end_nodes: usize,
}

#[derive(Args)]
struct AdmitArgs {
    #[arg(long = "n", value_delimiter = ',', default_value = "1000")]
    n_values: Vec<usize>,
    #[arg(long = "k", value_delimiter = ',', default_value = "100,200,300,400,500,600,700,800,900,1000")]
    k_values: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Defaults to 5..=400 in steps of 5.
    #[arg(long = "n", value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
}

#[derive(Args)]
struct ValidateArgs {
    schedule: PathBuf,
    pgts: PathBuf,
    #[arg(long = "t-si", default_value_t = 1800.0)]
    t_si_seconds: f64,
}

enum Failure {
    Invalid,
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid => 1,
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(&cli, a),
        Command::GenTopology(a) => cmd_gen_topology(&cli, a),
        Command::BenchAdmit(a) => cmd_bench_admit(&cli, a),
        Command::BenchSchedule(a) => cmd_bench_schedule(&cli, a),
        Command::Validate(a) => cmd_validate(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid => {}
                Failure::Config(m) => eprintln!("error: {m}"),
                Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// A file in `--out` when given, stdout otherwise.
fn sink(cli: &Cli, name: &str) -> Result<Box<dyn Write>, Failure> {
    match &cli.out {
        Some(dir) => Ok(Box::new(create(&dir.join(name))?)),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_json(out: impl Write, value: &impl Serialize) -> Result<(), Failure> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value).map_err(runtime)?;
    writeln!(out).map_err(runtime)?;
    out.flush().map_err(runtime)
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> Result<(), Failure> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seeds=[{seed}]"));
    }
    let cfg = ScenarioConfig::load(&args.config, &overrides).map_err(|e| Failure::Config(e.to_string()))?;
    let report = run_scenario(&cfg, &cfg.seeds).map_err(runtime)?;
    let dir = cli.out.clone().unwrap_or_else(|| args.config.parent().map(Path::to_path_buf).unwrap_or_default());
    match cli.format {
        Format::Csv => report.write_metrics_csv(create(&dir.join("metrics.csv"))?).map_err(runtime)?,
        Format::Json => {
            let rows: Vec<_> = report.runs.iter().flat_map(|r| r.intervals.iter()).collect();
            write_json(create(&dir.join("metrics.json"))?, &rows)?;
        }
    }
    report.write_summary_json(create(&dir.join("summary.json"))?).map_err(runtime)?;
    report.write_events_jsonl(create(&dir.join("events.jsonl"))?).map_err(runtime)?;
    if args.export_schedule {
        let mut sim = Simulation::new(&cfg, cfg.seeds[0]).map_err(runtime)?;
        for _ in 0..cfg.horizon_intervals {
            sim.step_interval();
        }
        if let Some((schedule, tasks)) = sim.latest_schedule() {
            write_json(create(&dir.join("schedule.json"))?, schedule)?;
            write_json(create(&dir.join("pgts.json"))?, &tasks)?;
        }
    }
    let s = &report.summary;
    let show = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    eprintln!(
        "{} runs: submitted {} accepted {} minimal service {} acceptance {} bonus share {} -> {}",
        s.runs,
        s.submitted,
        s.accepted,
        show(s.minimal_service_proportion),
        show(s.acceptance_proportion),
        show(s.bonus_proportion),
        dir.display()
    );
    Ok(())
}

fn cmd_gen_topology(cli: &Cli, args: &TopologyArgs) -> Result<(), Failure> {
    let graph = if args.dumbbell {
        dumbbell()
    } else {
        let params = TopologyParams { backbones: args.backbones, local_areas: args.local_areas, end_nodes: args.end_nodes };
        random_topology(params, cli.seed.unwrap_or(0)).map_err(|e| Failure::Config(e.to_string()))?
    };
    write_json(sink(cli, "topology.json")?, &TopologyFile::from(graph))
}

#[derive(Serialize)]
struct AdmitRow {
    n: usize,
    k: u64,
    phase: Phase,
    repeats: usize,
    mean_s: f64,
    std_s: f64,
    median_s: f64,
}

impl AdmitRow {
    fn new(n: usize, p: &BenchmarkPoint) -> Self {
        AdmitRow { n, k: p.x, phase: p.phase, repeats: p.repeats, mean_s: p.mean_s, std_s: p.std_s, median_s: p.median_s }
    }
}

#[derive(Serialize)]
struct NamedFit {
    over: String,
    fit: PolyFit,
    loglog_slope: Option<f64>,
}

fn fit_series(over: String, xs: &[f64], ys: &[f64], degree: usize) -> Option<NamedFit> {
    Some(NamedFit { over, fit: polyfit(xs, ys, degree)?, loglog_slope: loglog_slope(xs, ys) })
}

fn write_table<T: Serialize>(out: impl Write, rows: impl IntoIterator<Item = T>) -> Result<(), Failure> {
    let mut w = csv_writer(out);
    for r in rows {
        w.serialize(r).map_err(runtime)?;
    }
    w.flush().map_err(runtime)
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(true).from_writer(out)
}

fn cmd_bench_admit(cli: &Cli, args: &AdmitArgs) -> Result<(), Failure> {
    if args.n_values.iter().chain(&args.k_values).any(|&v| v == 0) || args.repeats == 0 {
        return Err(Failure::Config("N, k and repeats must be positive".into()));
    }
    let points = bench_admit(&args.n_values, &args.k_values, args.repeats, cli.seed.unwrap_or(0));
    let mut fits = Vec::new();
    for &n in &args.n_values {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().filter(|(m, _)| *m == n).map(|(_, p)| (p.x as f64, p.mean_s)).unzip();
        fits.extend(fit_series(format!("k at N={n}"), &xs, &ys, 3));
    }
    for &k in &args.k_values {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().filter(|(_, p)| p.x == k as u64).map(|(n, p)| (*n as f64, p.mean_s)).unzip();
        fits.extend(fit_series(format!("N at k={k}"), &xs, &ys, 2));
    }
    let rows: Vec<AdmitRow> = points.iter().map(|(n, p)| AdmitRow::new(*n, p)).collect();
    match cli.format {
        Format::Csv => {
            write_table(sink(cli, "bench_admit.csv")?, &rows)?;
            for f in &fits {
                eprintln!("fit {}: degree {} R2 {:.4} log-log slope {:?}", f.over, f.fit.degree(), f.fit.r_squared, f.loglog_slope);
            }
            Ok(())
        }
        Format::Json => write_json(sink(cli, "bench_admit.json")?, &serde_json::json!({ "points": rows, "fits": fits })),
    }
}

fn cmd_bench_schedule(cli: &Cli, args: &ScheduleArgs) -> Result<(), Failure> {
    let n_values = args.n_values.clone().unwrap_or_else(stress_grid);
    if n_values.contains(&0) || args.repeats == 0 {
        return Err(Failure::Config("N and repeats must be positive".into()));
    }
    let report = bench_schedule(&n_values, args.repeats);
    match cli.format {
        Format::Csv => {
            write_table(sink(cli, "bench_schedule.csv")?, report.rows())?;
            let r2 = |f: &Option<PolyFit>| f.as_ref().map(|f| f.r_squared);
            eprintln!(
                "minimal quadratic R2 {:?}, total cubic R2 {:?}, bonus cubic R2 {:?}",
                r2(&report.minimal_fit),
                r2(&report.total_fit),
                r2(&report.bonus_fit)
            );
            eprintln!(
                "bonus peak: quadratic vertex {:?}, cubic argmax {:?}, raw {:?}; no bonus PGAs from N = {:?}",
                report.bonus_peak_quadratic, report.bonus_peak_fitted, report.bonus_peak_raw, report.bonus_zero_from
            );
            Ok(())
        }
        Format::Json => write_json(sink(cli, "bench_schedule.json")?, &report),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn cmd_validate(cli: &Cli, args: &ValidateArgs) -> Result<(), Failure> {
    let schedule: CompiledSchedule = read_json(&args.schedule)?;
    let tasks: Vec<Pgt> = read_json(&args.pgts)?;
    if args.t_si_seconds.is_nan() || args.t_si_seconds <= 0.0 {
        return Err(Failure::Config(format!("--t-si must be positive, got {}", args.t_si_seconds)));
    }
    let required: BTreeSet<_> = tasks.iter().map(|t| t.id).collect();
    let report = validate_schedule(&schedule, &tasks, &required, secs_to_nanos(args.t_si_seconds));
    let ok = report.is_valid() && report.shortfalls.is_empty();
    match cli.format {
        Format::Json => write_json(sink(cli, "validation.json")?, &serde_json::json!({ "valid": ok, "report": report }))?,
        Format::Csv => {
            let mut out = sink(cli, "validation.txt")?;
            let entries: usize = schedule.components.values().map(Vec::len).sum();
            let mut lines = vec![
                format!("components {} entries {} tasks {}", schedule.components.len(), entries, tasks.len()),
                format!("span {} ns .. {} ns, within interval: {}", report.min_start, report.max_end, report.within_interval),
            ];
            lines.extend(report.conflicts.iter().map(|c| format!("conflict {c:?}")));
            lines.extend(report.minsep_violations.iter().map(|m| format!("minsep violation {m:?}")));
            lines.extend(report.shortfalls.iter().map(|s| format!("shortfall {s:?}")));
            lines.extend(report.misaligned.iter().map(|m| format!("misaligned {m:?}")));
            lines.extend(report.bad_lengths.iter().map(|m| format!("bad length {m:?}")));
            lines.extend(report.unknown.iter().map(|m| format!("unknown task {m:?}")));
            lines.push(if ok { "valid".into() } else { "INVALID".into() });
            for l in lines {
                writeln!(out, "{l}").map_err(runtime)?;
            }
            out.flush().map_err(runtime)?;
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Invalid)
    }
}
