use crate::demand::Pgt;
use crate::time::Nanos;

/// Per-task quantities used by the required-time bound and direct allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskShape {
    pub duration: Nanos,
    pub minsep: Nanos,
    pub min_alloc: u32,
}

impl From<&Pgt> for TaskShape {
    fn from(p: &Pgt) -> Self {
        TaskShape { duration: p.duration, minsep: p.minsep, min_alloc: p.min_alloc }
    }
}

/// Cycle lengths c_x and repeat counts n_x for tasks sorted by `min_alloc`.
pub fn cycle_plan(tasks: &[TaskShape]) -> Vec<(Nanos, u32)> {
    let mut out = vec![(0, 0); tasks.len()];
    let (mut max_gap, mut sum) = (0 as Nanos, 0 as Nanos);
    for x in (0..tasks.len()).rev() {
        let t = tasks[x];
        max_gap = max_gap.max(t.duration.saturating_add(t.minsep));
        sum = sum.saturating_add(t.duration);
        let prev = if x == 0 { 1 } else { tasks[x - 1].min_alloc };
        out[x] = (max_gap.max(sum), t.min_alloc.saturating_sub(prev));
    }
    out
}

/// Upper bound on the shortest sequentially valid schedule giving every task
/// its minimal allocation. `tasks` must be sorted by `min_alloc`.
pub fn required_time(tasks: &[TaskShape]) -> Nanos {
    debug_assert!(tasks.windows(2).all(|w| w[0].min_alloc <= w[1].min_alloc));
    cycle_plan(tasks)
        .iter()
        .zip(tasks)
        .fold(0 as Nanos, |acc, (&(c, n), t)| acc.saturating_add(c.saturating_mul(Nanos::from(n))).saturating_add(t.duration))
}

pub fn calculate_required_time(tasks: &[Pgt]) -> Nanos {
    required_time(&tasks.iter().map(TaskShape::from).collect::<Vec<_>>())
}
