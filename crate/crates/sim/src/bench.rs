//! Complexity benchmarks for admission and schedule computation.

use std::time::Instant;

use qnet_core::demand::{DemandId, Pgt, PgtId, TaskAlternatives};
use qnet_core::network::{dumbbell, CellKey, Dumbbell, NetworkModel, Path};
use qnet_core::scheduler::{admit_tasks, bonus_phase, minimal_phase, FillingClassSet, NetworkSchedule};
use qnet_core::time::{secs_to_nanos, Nanos};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fit::{polyfit, PolyFit};

/// Timed runs discarded before measuring.
pub const WARMUP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Admit,
    Minimal,
    Bonus,
    Total,
}

/// One row of a benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPoint {
    pub phase: Phase,
    pub x: u64,
    pub mean_s: f64,
    pub std_s: f64,
    pub repeats: usize,
    pub median_s: f64,
}

impl BenchmarkPoint {
    pub fn from_samples(phase: Phase, x: u64, samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 { samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = match sorted.len() {
            0 => 0.0,
            l if l % 2 == 1 => sorted[l / 2],
            l => 0.5 * (sorted[l / 2 - 1] + sorted[l / 2]),
        };
        BenchmarkPoint { phase, x, mean_s: mean, std_s: var.sqrt(), repeats: samples.len(), median_s: median }
    }
}

/// Times `f` on fresh inputs: `WARMUP` discarded runs, then `repeats` kept.
/// Input preparation is not timed.
pub fn time_repeats<I, O>(repeats: usize, mut prepare: impl FnMut() -> I, mut f: impl FnMut(I) -> O) -> Vec<f64> {
    let mut out = Vec::with_capacity(repeats);
    for i in 0..WARMUP + repeats.max(1) {
        let input = prepare();
        let t = Instant::now();
        let o = f(input);
        let dt = t.elapsed().as_secs_f64();
        std::hint::black_box(o);
        if i >= WARMUP {
            out.push(dt);
        }
    }
    out
}

/// Shortest wall time of one sample in [`time_batched`].
pub const MIN_SAMPLE_S: f64 = 2e-3;

/// One-sample timer for `f`: each call averages enough back-to-back runs
/// to last at least [`MIN_SAMPLE_S`]. The batch size is fixed by a probe.
pub fn batched<'a, I, O>(mut prepare: impl FnMut() -> I + 'a, mut f: impl FnMut(I) -> O + 'a) -> impl FnMut() -> f64 + 'a {
    let probe = time_repeats(1, &mut prepare, &mut f)[0];
    let batch = ((MIN_SAMPLE_S / probe.max(1e-9)).ceil() as usize).clamp(1, 100_000);
    move || {
        let inputs: Vec<I> = (0..batch).map(|_| prepare()).collect();
        let t = Instant::now();
        let outputs: Vec<O> = inputs.into_iter().map(&mut f).collect();
        let dt = t.elapsed().as_secs_f64() / batch as f64;
        drop(std::hint::black_box(outputs));
        dt
    }
}

/// Like [`time_repeats`], with samples from [`batched`].
pub fn time_batched<I, O>(repeats: usize, prepare: impl FnMut() -> I, f: impl FnMut(I) -> O) -> Vec<f64> {
    let mut sample = batched(prepare, f);
    (0..repeats.max(1)).map(|_| sample()).collect()
}

/// `repeats` samples of every sampler, taken in rounds that visit each one
/// once, alternating direction. Slow drift in machine speed then lands on
/// all points alike instead of bending the curve.
pub fn interleaved(repeats: usize, samplers: &mut [Box<dyn FnMut() -> f64 + '_>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(repeats); samplers.len()];
    for round in 0..repeats.max(1) {
        let order: Vec<usize> = if round % 2 == 0 { (0..samplers.len()).collect() } else { (0..samplers.len()).rev().collect() };
        for i in order {
            out[i].push(samplers[i]());
        }
    }
    out
}

fn egi_path(egi: u32, a: u32, b: u32) -> Path {
    let egis = [Dumbbell::I1, Dumbbell::I2, Dumbbell::I3];
    Path(vec![Dumbbell::end_node(egi, a), egis[egi as usize], Dumbbell::end_node(egi, b)])
}

/// Input of one admission benchmark: active tasks and the intake buffer.
#[derive(Debug, Clone)]
pub struct AdmitInstance {
    pub classes: FillingClassSet,
    pub intake: Vec<TaskAlternatives>,
    pub t_si: Nanos,
}

pub const ADMIT_T_SI: f64 = 1800.0;

/// `n` active and `k` incoming random tasks on the dumbbell. Tasks share a
/// few paths in each interface cell so that classes grow large; every task
/// is small enough that Good Accounting stays within the interval.
pub fn admit_instance(n: usize, k: usize, seed: u64) -> AdmitInstance {
    let model = NetworkModel::build(dumbbell(), 1).expect("dumbbell is valid");
    let mut classes = FillingClassSet::new(&model.partition, &model.xi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths: Vec<Path> = (0..3).flat_map(|e| [egi_path(e, 0, 1), egi_path(e, 2, 3)]).collect();
    let budget = secs_to_nanos(ADMIT_T_SI) / (n + k).max(1) as i64 * 3;
    let make = |id: u64, rng: &mut ChaCha8Rng| {
        let min_alloc = rng.random_range(1..=4u32);
        let per = (budget / i64::from(min_alloc)).max(2);
        let duration = rng.random_range(1..=per / 2);
        let minsep = rng.random_range(0..=per / 2);
        Pgt {
            id: PgtId(id),
            demand: DemandId(id),
            duration,
            p_packet: 0.5,
            min_alloc,
            path: paths.choose(rng).unwrap().clone(),
            minsep,
            t_start: 0.0,
            t_expiry: 1e12,
        }
    };
    for id in 0..n as u64 {
        let t = make(id, &mut rng);
        classes.assign(t).expect("interface path");
    }
    let intake = (0..k as u64).map(|i| vec![make(n as u64 + i, &mut rng)]).collect();
    AdmitInstance { classes, intake, t_si: secs_to_nanos(ADMIT_T_SI) }
}

/// Times `admit_tasks` for every (N, k) combination.
pub fn bench_admit(n_values: &[usize], k_values: &[usize], repeats: usize, seed: u64) -> Vec<(usize, BenchmarkPoint)> {
    let cells: Vec<(usize, usize)> = n_values.iter().flat_map(|&n| k_values.iter().map(move |&k| (n, k))).collect();
    let instances: Vec<AdmitInstance> = cells.iter().map(|&(n, k)| admit_instance(n, k, seed ^ ((n as u64) << 32) ^ k as u64)).collect();
    let mut samplers: Vec<Box<dyn FnMut() -> f64 + '_>> = instances
        .iter()
        .map(|inst| {
            Box::new(batched(|| (inst.classes.clone(), inst.intake.clone()), |(mut c, i)| admit_tasks(i, &mut c, inst.t_si)))
                as Box<dyn FnMut() -> f64>
        })
        .collect();
    let samples = interleaved(repeats, &mut samplers);
    cells.iter().zip(&samples).map(|(&(n, k), s)| (n, BenchmarkPoint::from_samples(Phase::Admit, k as u64, s))).collect()
}

pub const STRESS_T_SI: f64 = 8000.0;
pub const STRESS_MIN_ALLOC: u32 = 20;
pub const STRESS_MINSEP: f64 = 200.0;

/// The stress set: `n` unit-length tasks with 20 PGAs each in one class,
/// the first with a 200 s minimum separation and the rest with none.
pub fn stress_instance(n: usize) -> FillingClassSet {
    let model = NetworkModel::build(dumbbell(), 1).expect("dumbbell is valid");
    let mut classes = FillingClassSet::new(&model.partition, &model.xi);
    for i in 0..n as u64 {
        let minsep = if i == 0 { secs_to_nanos(STRESS_MINSEP) } else { 0 };
        classes
            .assign(Pgt {
                id: PgtId(i),
                demand: DemandId(i),
                duration: secs_to_nanos(1.0),
                p_packet: 0.5,
                min_alloc: STRESS_MIN_ALLOC,
                path: egi_path(0, 0, 1),
                minsep,
                t_start: 0.0,
                t_expiry: 1e12,
            })
            .expect("interface path");
    }
    debug_assert!(classes.get(CellKey::Interface(Dumbbell::I1)).is_some());
    classes
}

/// Timings and PGA counts of the stress sweep at one N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressPoint {
    pub n: usize,
    pub minimal: BenchmarkPoint,
    pub bonus: BenchmarkPoint,
    pub total: BenchmarkPoint,
    pub minimal_pgas: usize,
    pub bonus_pgas: usize,
}

pub fn bench_stress_point(n: usize, repeats: usize) -> StressPoint {
    bench_schedule(&[n], repeats).points.remove(0)
}

struct StressCase {
    n: usize,
    classes: FillingClassSet,
    base: NetworkSchedule,
    minimal_pgas: usize,
    bonus_pgas: usize,
}

impl StressCase {
    fn new(n: usize) -> Self {
        let classes = stress_instance(n);
        let mut base = NetworkSchedule::new(0, 1);
        let minimal_pgas = minimal_phase(&classes, &mut base);
        let bonus_pgas = bonus_phase(&classes, &mut base.clone(), secs_to_nanos(STRESS_T_SI), None).pgas_added;
        StressCase { n, classes, base, minimal_pgas, bonus_pgas }
    }
}

/// Sweep over N with fitted curves and the bonus-phase peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressReport {
    pub points: Vec<StressPoint>,
    pub minimal_fit: Option<PolyFit>,
    pub total_fit: Option<PolyFit>,
    pub bonus_fit: Option<PolyFit>,
    /// Argmax over the grid of the cubic fit to bonus-phase medians.
    pub bonus_peak_fitted: Option<usize>,
    /// Vertex of a quadratic fit to bonus-phase medians, when concave.
    pub bonus_peak_quadratic: Option<f64>,
    /// Raw argmax of bonus-phase medians.
    pub bonus_peak_raw: Option<usize>,
    /// Smallest N from which the bonus phase adds no PGAs.
    pub bonus_zero_from: Option<usize>,
}

pub fn stress_grid() -> Vec<usize> {
    (1..=80).map(|i| i * 5).collect()
}

/// Times both phases at every N. Samples are interleaved across N.
pub fn bench_schedule(n_values: &[usize], repeats: usize) -> StressReport {
    let t_si = secs_to_nanos(STRESS_T_SI);
    let cases: Vec<StressCase> = n_values.iter().map(|&n| StressCase::new(n)).collect();
    let mut samplers: Vec<Box<dyn FnMut() -> f64 + '_>> = Vec::with_capacity(2 * cases.len());
    for c in &cases {
        samplers.push(Box::new(batched(
            || NetworkSchedule::new(0, 1),
            |mut s| {
                minimal_phase(&c.classes, &mut s);
                s
            },
        )));
        samplers.push(Box::new(batched(
            || c.base.clone(),
            move |mut s| {
                bonus_phase(&c.classes, &mut s, t_si, None);
                s
            },
        )));
    }
    let samples = interleaved(repeats, &mut samplers);
    let points: Vec<StressPoint> = cases
        .iter()
        .zip(samples.chunks(2))
        .map(|(c, s)| {
            let total: Vec<f64> = s[0].iter().zip(&s[1]).map(|(a, b)| a + b).collect();
            StressPoint {
                n: c.n,
                minimal: BenchmarkPoint::from_samples(Phase::Minimal, c.n as u64, &s[0]),
                bonus: BenchmarkPoint::from_samples(Phase::Bonus, c.n as u64, &s[1]),
                total: BenchmarkPoint::from_samples(Phase::Total, c.n as u64, &total),
                minimal_pgas: c.minimal_pgas,
                bonus_pgas: c.bonus_pgas,
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let med = |f: fn(&StressPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    let minimal_fit = polyfit(&xs, &med(|p| p.minimal.median_s), 2);
    let total_fit = polyfit(&xs, &med(|p| p.total.median_s), 3);
    let bonus_fit = polyfit(&xs, &med(|p| p.bonus.median_s), 3);
    let bonus_peak_fitted =
        bonus_fit.as_ref().and_then(|f| points.iter().max_by(|a, b| f.eval(a.n as f64).total_cmp(&f.eval(b.n as f64))).map(|p| p.n));
    let bonus_peak_quadratic =
        polyfit(&xs, &med(|p| p.bonus.median_s), 2).and_then(|f| (f.coefficients[2] < 0.0).then(|| -f.coefficients[1] / (2.0 * f.coefficients[2])));
    let bonus_peak_raw = points.iter().max_by(|a, b| a.bonus.median_s.total_cmp(&b.bonus.median_s)).map(|p| p.n);
    let bonus_zero_from = points.iter().rposition(|p| p.bonus_pgas > 0).map_or(points.first().map(|p| p.n), |i| points.get(i + 1).map(|p| p.n));
    StressReport { points, minimal_fit, total_fit, bonus_fit, bonus_peak_fitted, bonus_peak_quadratic, bonus_peak_raw, bonus_zero_from }
}

impl StressReport {
    pub fn rows(&self) -> impl Iterator<Item = &BenchmarkPoint> {
        self.points.iter().flat_map(|p| [&p.minimal, &p.bonus, &p.total])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qnet_core::scheduler::calculate_required_time;

    #[test]
    fn stress_set_fills_interval_at_400() {
        let classes = stress_instance(400);
        let tasks: Vec<Pgt> = classes.tasks().cloned().collect();
        assert_eq!(calculate_required_time(&tasks), secs_to_nanos(STRESS_T_SI));
        let p = bench_stress_point(400, 1);
        assert_eq!(p.bonus_pgas, 0);
        assert_eq!(p.minimal_pgas, 8000);
    }

    #[test]
    fn bonus_adds_pgas_below_saturation() {
        let p = bench_stress_point(100, 1);
        assert_eq!(p.minimal_pgas, 2000);
        assert!(p.bonus_pgas > 0);
    }

    #[test]
    fn admit_instance_is_admissible() {
        let inst = admit_instance(200, 50, 1);
        assert_eq!(inst.classes.task_count(), 200);
        assert!(inst.classes.good_accounting() <= inst.t_si);
        assert_eq!(inst.intake.len(), 50);
    }

    #[test]
    fn point_statistics() {
        let p = BenchmarkPoint::from_samples(Phase::Admit, 3, &[1.0, 2.0, 3.0, 10.0]);
        assert_eq!(p.mean_s, 4.0);
        assert_eq!(p.median_s, 2.5);
        assert_eq!(p.repeats, 4);
        assert!(p.std_s > 0.0);
    }
}
