//! Per-interval PGA counts certified by Hoeffding's inequality.

use thiserror::Error;

pub const DEFAULT_ALLOCATION_CEILING: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
pub enum AllocationError {
    #[error("no allocation up to {ceiling} certifies the service bound")]
    Unsatisfiable { ceiling: u32 },
    #[error("allocation inputs out of range")]
    InvalidInput,
}

/// Whether `attempts` PGAs at success probability `p` certify
/// P[successes < n_inst] < epsilon.
fn certifies(attempts: f64, p: f64, n_inst: f64, ln_eps: f64) -> bool {
    let slack = attempts * p - n_inst;
    slack >= 0.0 && -2.0 * slack * slack / attempts < ln_eps
}

/// Smallest `l >= 1` such that `l * n_si` attempts certify the bound.
pub fn minimal_allocation(p_packet: f64, n_inst: u64, n_si: u64, epsilon: f64, ceiling: u32) -> Result<u32, AllocationError> {
    if !(p_packet > 0.0 && p_packet <= 1.0) || n_si == 0 || !(epsilon > 0.0 && epsilon < 1.0) || ceiling == 0 {
        return Err(AllocationError::InvalidInput);
    }
    if n_inst == 0 {
        return Ok(1);
    }
    if p_packet == 1.0 {
        let l = n_inst.div_ceil(n_si).max(1);
        return u32::try_from(l).ok().filter(|&l| l <= ceiling).ok_or(AllocationError::Unsatisfiable { ceiling });
    }
    let (k, n, ln_eps) = (n_inst as f64, n_si as f64, epsilon.ln());
    let ok = |l: u32| certifies(f64::from(l) * n, p_packet, k, ln_eps);
    if !ok(ceiling) {
        return Err(AllocationError::Unsatisfiable { ceiling });
    }
    let mut lo = ((k / (n * p_packet)).ceil() as u32).clamp(1, ceiling);
    let mut hi = ceiling;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Binomial, DiscreteCDF};

    fn exact_tail(l: u32, n_si: u64, p: f64, n_inst: u64) -> f64 {
        if n_inst == 0 {
            return 0.0;
        }
        Binomial::new(p, u64::from(l) * n_si).unwrap().cdf(n_inst - 1)
    }

    #[test]
    fn deterministic_success() {
        assert_eq!(minimal_allocation(1.0, 10, 5, 0.01, 100), Ok(2));
        assert_eq!(minimal_allocation(1.0, 11, 5, 0.01, 100), Ok(3));
    }

    #[test]
    fn zero_instances() {
        assert_eq!(minimal_allocation(0.3, 0, 4, 0.01, 100), Ok(1));
    }

    #[test]
    fn half_probability_case() {
        let l = minimal_allocation(0.5, 10, 10, 0.01, DEFAULT_ALLOCATION_CEILING).unwrap();
        assert!(exact_tail(l, 10, 0.5, 10) < 0.01);
        // Smallest certified value: one less fails the Hoeffding condition.
        assert!(!certifies(f64::from(l - 1) * 10.0, 0.5, 10.0, 0.01f64.ln()));
    }

    #[test]
    fn unsatisfiable_ceiling() {
        assert_eq!(minimal_allocation(0.001, 1000, 1, 1e-9, 10), Err(AllocationError::Unsatisfiable { ceiling: 10 }));
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(minimal_allocation(0.0, 1, 1, 0.1, 10), Err(AllocationError::InvalidInput));
        assert_eq!(minimal_allocation(0.5, 1, 0, 0.1, 10), Err(AllocationError::InvalidInput));
        assert_eq!(minimal_allocation(0.5, 1, 1, 1.0, 10), Err(AllocationError::InvalidInput));
    }

    proptest::proptest! {
        #[test]
        fn exact_tail_below_epsilon(p in 0.05f64..1.0, n_inst in 0u64..200, n_si in 1u64..50, log_eps in -8.0f64..-0.1) {
            let eps = 10f64.powf(log_eps);
            let l = minimal_allocation(p, n_inst, n_si, eps, DEFAULT_ALLOCATION_CEILING).unwrap();
            proptest::prop_assert!(l >= 1);
            proptest::prop_assert!(exact_tail(l, n_si, p, n_inst) < eps);
        }

        #[test]
        fn monotone_in_instances(p in 0.05f64..1.0, n_inst in 1u64..100, n_si in 1u64..20) {
            let a = minimal_allocation(p, n_inst, n_si, 0.01, DEFAULT_ALLOCATION_CEILING).unwrap();
            let b = minimal_allocation(p, n_inst + 1, n_si, 0.01, DEFAULT_ALLOCATION_CEILING).unwrap();
            proptest::prop_assert!(a <= b);
        }
    }
}
