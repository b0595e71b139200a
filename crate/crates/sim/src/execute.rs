//! Stochastic stand-in for running a schedule on hardware.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Outcome of one task's PGAs in one interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Execution {
    pub successes: u64,
    /// Index of the PGA whose success met the remaining need, if any.
    pub completed_at: Option<usize>,
}

/// Draws successes for `count` PGAs of success probability `p`.
///
/// When fewer PGAs than `remaining` are scheduled the task cannot finish and
/// a single Binomial draw suffices; otherwise PGAs are tried in order and
/// counting stops at the one that completes the task.
pub fn execute_pgas<R: Rng>(count: usize, p: f64, remaining: u64, rng: &mut R) -> Execution {
    if count == 0 || p <= 0.0 {
        return Execution { successes: 0, completed_at: None };
    }
    if (count as u64) < remaining {
        let successes = Binomial::new(count as u64, p.min(1.0)).expect("probability in range").sample(rng);
        return Execution { successes, completed_at: None };
    }
    let mut successes = 0;
    for i in 0..count {
        if rng.random_bool(p.min(1.0)) {
            successes += 1;
            if successes >= remaining {
                return Execution { successes, completed_at: Some(i) };
            }
        }
    }
    Execution { successes, completed_at: None }
}

/// PGAs of one task in the executed schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecutionInput {
    pub count: usize,
    pub p_packet: f64,
    pub remaining: u64,
}

pub fn execute_schedule<R: Rng>(tasks: &[ExecutionInput], rng: &mut R) -> Vec<Execution> {
    tasks.iter().map(|t| execute_pgas(t.count, t.p_packet, t.remaining, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn certain_success_stops_at_need() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(execute_pgas(5, 1.0, 3, &mut rng), Execution { successes: 3, completed_at: Some(2) });
    }

    #[test]
    fn zero_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(execute_pgas(10, 0.0, 3, &mut rng).successes, 0);
        assert_eq!(execute_pgas(10, 0.0, 30, &mut rng).successes, 0);
    }

    #[test]
    fn never_exceeds_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let e = execute_pgas(7, 0.6, 4, &mut rng);
            assert!(e.successes <= 7);
            assert_eq!(e.completed_at.is_some(), e.successes >= 4);
        }
    }

    #[test]
    fn binomial_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| execute_pgas(20, 0.3, 1000, &mut rng).successes as f64).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let (mu, sigma2) = (6.0, 4.2);
        assert!((mean - mu).abs() < 3.0 * (sigma2 / n as f64).sqrt(), "mean {mean}");
        // Standard error of the sample variance for a binomial: sqrt((mu4 - sigma^4) / n).
        let mu4 = 20.0 * 0.3 * 0.7 * (1.0 + 3.0 * (20.0 - 2.0) * 0.3 * 0.7);
        assert!((var - sigma2).abs() < 3.0 * ((mu4 - sigma2 * sigma2) / n as f64).sqrt(), "var {var}");
    }
}
