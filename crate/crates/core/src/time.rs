//! Integer time base used inside scheduling intervals.

/// Nanoseconds relative to the start of a scheduling interval.
pub type Nanos = i64;

pub const NANOS_PER_SEC: i64 = 1_000_000_000;

/// Rounds seconds to the nearest nanosecond.
pub fn secs_to_nanos(secs: f64) -> Nanos {
    (secs * NANOS_PER_SEC as f64).round() as Nanos
}

pub fn nanos_to_secs(ns: Nanos) -> f64 {
    ns as f64 / NANOS_PER_SEC as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        assert_eq!(secs_to_nanos(1.5), 1_500_000_000);
        assert_eq!(nanos_to_secs(secs_to_nanos(1800.0)), 1800.0);
        assert_eq!(secs_to_nanos(0.000_000_000_4), 0);
    }
}
