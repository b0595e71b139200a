//! Probability that some window of a Bernoulli attempt sequence holds enough successes.

use statrs::function::factorial::ln_binomial;
use thiserror::Error;

use crate::time::Nanos;

#[derive(Debug, Error, PartialEq)]
pub enum ScanError {
    #[error("window {window}s is longer than the attempt duration {duration}s")]
    InvalidWindow { window: f64, duration: f64 },
    #[error("invalid scan input: {0}")]
    InvalidInput(&'static str),
}

/// Binomial probability mass b(k; n, p).
pub fn binom_pmf(k: i64, n: u64, p: f64) -> f64 {
    if k < 0 || k as u64 > n {
        return 0.0;
    }
    let k = k as u64;
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

/// Binomial CDF F(k; n, p) by direct summation; intended for small `k`.
pub fn binom_cdf(k: i64, n: u64, p: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if k as u64 >= n {
        return 1.0;
    }
    (0..=k).map(|i| binom_pmf(i, n, p)).sum::<f64>().min(1.0)
}

/// P(some run of `window` consecutive attempts among `attempts` holds at least `s` successes).
///
/// Exact for `s = 1` and for a single window; otherwise the Bernoulli scan
/// approximation built from the two- and three-window probabilities.
pub fn scan_probability(attempts: u64, window: u64, s: u32, p: f64) -> f64 {
    let window = window.max(1);
    if s == 0 {
        return 1.0;
    }
    if attempts < u64::from(s) || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return if window >= u64::from(s) { 1.0 } else { 0.0 };
    }
    if s == 1 {
        return -(attempts as f64 * (-p).ln_1p()).exp_m1();
    }
    if attempts <= window {
        return 1.0 - binom_cdf(i64::from(s) - 1, attempts, p);
    }
    let k = i64::from(s);
    let w = window;
    let f = |j: i64, n: u64| binom_cdf(j, n, p);
    let b = |j: i64| binom_pmf(j, w, p);
    let wp = w as f64 * p;

    let q1 = f(k - 1, w);
    let q2 = q1 * q1 - (k - 1) as f64 * b(k) * f(k - 2, w) + wp * b(k) * f(k - 3, w - 1);

    let a1 = 2.0 * b(k) * q1 * ((k - 1) as f64 * f(k - 2, w) - wp * f(k - 3, w - 1));
    let a2 = 0.5
        * b(k).powi(2)
        * ((k - 1) as f64 * (k - 2) as f64 * f(k - 3, w) - 2.0 * (k - 2) as f64 * wp * f(k - 4, w - 1)
            + (w as f64) * (w as f64 - 1.0) * p * p * f(k - 5, w.saturating_sub(2)));
    let a3: f64 = (1..k).map(|r| b(2 * k - r) * f(r - 1, w).powi(2)).sum();
    let a4: f64 = (2..k).map(|r| b(2 * k - r) * b(r) * ((r - 1) as f64 * f(r - 2, w) - wp * f(r - 3, w - 1))).sum();
    let q3 = q1.powi(3) - a1 + a2 + a3 - a4;

    let l = attempts as f64 / w as f64;
    let none = if l < 2.0 {
        if q1 <= 0.0 {
            0.0
        } else {
            q1 * (q2 / q1).clamp(0.0, 1.0).powf(l - 1.0)
        }
    } else if q2 <= 0.0 {
        0.0
    } else {
        q2 * (q3 / q2).clamp(0.0, 1.0).powf(l - 2.0)
    };
    (1.0 - none).clamp(0.0, 1.0)
}

/// Attempt counts for a duration and window under a fixed attempt period.
pub fn attempts_for(duration: f64, window: f64, attempt_period: f64) -> (u64, u64) {
    let m = (duration / attempt_period + 1e-9).floor() as u64;
    let mw = ((window / attempt_period + 1e-9).floor() as u64).max(1);
    (m, mw)
}

/// Packet success probability of one PGA of `duration` seconds.
///
/// Attempts happen every `attempt_period` seconds, each succeeding with
/// probability `rate * attempt_period`.
pub fn packet_success_probability(rate: f64, window: f64, s: u32, duration: f64, attempt_period: f64) -> Result<f64, ScanError> {
    if window.is_nan() || window <= 0.0 || attempt_period.is_nan() || attempt_period <= 0.0 || rate.is_nan() || rate < 0.0 || s == 0 {
        return Err(ScanError::InvalidInput("window, attempt period and pairs must be positive"));
    }
    if window > duration {
        return Err(ScanError::InvalidWindow { window, duration });
    }
    let p = rate * attempt_period;
    if p > 1.0 {
        return Err(ScanError::InvalidInput("rate * attempt_period exceeds 1"));
    }
    let (m, mw) = attempts_for(duration, window, attempt_period);
    Ok(scan_probability(m, mw, s, p))
}

/// Shortest PGA duration (a whole number of attempt periods) whose packet
/// success probability reaches `target`, searching up to `max_duration`.
pub fn duration_for_probability(target: f64, rate: f64, window: f64, s: u32, attempt_period: Nanos, max_duration: Nanos) -> Option<Nanos> {
    if attempt_period <= 0 {
        return None;
    }
    let tau = attempt_period as f64 / 1e9;
    let p = rate * tau;
    if !(0.0..=1.0).contains(&p) {
        return None;
    }
    let (_, mw) = attempts_for(window, window, tau);
    // The attempt run must cover at least one whole window.
    let lo_m = mw.max((window / tau - 1e-9).ceil() as u64);
    let hi_m = (max_duration / attempt_period) as u64;
    if hi_m < lo_m {
        return None;
    }
    let prob = |m: u64| scan_probability(m, mw, s, p);
    if prob(hi_m) < target {
        return None;
    }
    let (mut lo, mut hi) = (lo_m, hi_m);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if prob(mid) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo as Nanos * attempt_period)
}

#[cfg(test)]
pub(crate) mod oracle {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exact probability by dynamic programming over the last `window - 1` outcomes.
    pub fn exact_scan(attempts: u64, window: u64, s: u32, p: f64) -> f64 {
        assert!(window <= 16);
        let keep = (window - 1) as u32;
        let mask = if keep == 0 { 0 } else { (1u32 << keep) - 1 };
        let mut dist = vec![0.0f64; 1 << keep];
        dist[0] = 1.0;
        let mut hit = 0.0;
        for _ in 0..attempts {
            let mut next = vec![0.0f64; 1 << keep];
            for (state, &pr) in dist.iter().enumerate() {
                if pr == 0.0 {
                    continue;
                }
                for (bit, pb) in [(0u32, 1.0 - p), (1u32, p)] {
                    let full = ((state as u32) << 1) | bit;
                    let in_window = (full & ((mask << 1) | 1)).count_ones();
                    if in_window >= s {
                        hit += pr * pb;
                    } else {
                        next[(full & mask) as usize] += pr * pb;
                    }
                }
            }
            dist = next;
        }
        hit
    }

    pub fn monte_carlo_scan(attempts: u64, window: u64, s: u32, p: f64, trials: u64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0u64;
        let mut buf = vec![false; attempts as usize];
        for _ in 0..trials {
            let mut count = 0u32;
            let mut found = false;
            for i in 0..attempts as usize {
                buf[i] = rng.random_bool(p);
                count += u32::from(buf[i]);
                if i >= window as usize {
                    count -= u32::from(buf[i - window as usize]);
                }
                if count >= s {
                    found = true;
                    break;
                }
            }
            hits += u64::from(found);
        }
        hits as f64 / trials as f64
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;

    #[test]
    fn single_pair_is_exact() {
        let v = scan_probability(10, 3, 1, 0.1);
        assert!((v - (1.0 - 0.9f64.powi(10))).abs() < 1e-12);
        assert!((v - 0.6513).abs() < 1e-4);
    }

    #[test]
    fn too_few_attempts() {
        assert_eq!(scan_probability(2, 2, 3, 0.5), 0.0);
    }

    #[test]
    fn single_window_is_binomial_tail() {
        let v = scan_probability(5, 5, 2, 0.3);
        assert!((v - exact_scan(5, 5, 2, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn two_windows_match_exact() {
        for (w, s, p) in [(5, 2, 0.3), (5, 3, 0.3), (8, 3, 0.2), (10, 4, 0.25), (6, 2, 0.05)] {
            let approx = scan_probability(2 * w, w, s, p);
            let exact = exact_scan(2 * w, w, s, p);
            assert!((approx - exact).abs() < 1e-9, "w={w} s={s} p={p}: {approx} vs {exact}");
        }
    }

    #[test]
    fn three_windows_match_exact() {
        for (w, s, p) in [(5, 2, 0.3), (5, 3, 0.3), (8, 3, 0.2), (10, 4, 0.25)] {
            let approx = scan_probability(3 * w, w, s, p);
            let exact = exact_scan(3 * w, w, s, p);
            assert!((approx - exact).abs() < 1e-9, "w={w} s={s} p={p}: {approx} vs {exact}");
        }
    }

    #[test]
    fn long_sequences_close_to_exact() {
        for (m, w, s, p) in [(20, 5, 3, 0.3), (60, 6, 3, 0.1), (100, 10, 4, 0.2), (200, 8, 2, 0.05), (37, 5, 2, 0.2)] {
            let approx = scan_probability(m, w, s, p);
            let exact = exact_scan(m, w, s, p);
            assert!((approx - exact).abs() < 0.01, "m={m} w={w} s={s} p={p}: {approx} vs {exact}");
        }
    }

    #[test]
    fn agrees_with_monte_carlo() {
        let approx = scan_probability(20, 5, 3, 0.3);
        let mc = monte_carlo_scan(20, 5, 3, 0.3, 1_000_000, 11);
        assert!((approx - mc).abs() < 0.02, "{approx} vs {mc}");
    }

    #[test]
    fn window_longer_than_duration_is_rejected() {
        assert!(matches!(packet_success_probability(10.0, 2.0, 2, 1.0, 0.01), Err(ScanError::InvalidWindow { .. })));
    }

    #[test]
    fn physical_units() {
        // 10 attempts of 0.01 s at 10 Hz: p = 0.1 per attempt.
        let v = packet_success_probability(10.0, 0.05, 1, 0.1, 0.01).unwrap();
        assert!((v - (1.0 - 0.9f64.powi(10))).abs() < 1e-9);
    }

    #[test]
    fn inversion_finds_smallest_duration() {
        let tau: Nanos = 10_000_000;
        let e = duration_for_probability(0.5, 10.0, 0.1, 2, tau, 100_000_000_000).unwrap();
        let m = (e / tau) as u64;
        assert!(scan_probability(m, 10, 2, 0.1) >= 0.5);
        assert!(scan_probability(m - 1, 10, 2, 0.1) < 0.5);
        assert_eq!(duration_for_probability(0.999_999, 0.001, 0.1, 5, tau, 1_000_000_000), None);
    }
}
