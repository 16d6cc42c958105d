//! Coarse classes of task duration for colour coding.
//!
//! Durations come from instrumented runs and are approximate: the
//! instrumentation itself shifts the timings it reports.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DurationBucket {
    #[serde(rename = "sub_100us")]
    Sub100Us,
    #[serde(rename = "100us_to_10ms")]
    Us100To10Ms,
    #[serde(rename = "10ms_to_100ms")]
    Ms10To100Ms,
    #[serde(rename = "100ms_to_1s")]
    Ms100To1S,
    #[serde(rename = "over_1s")]
    Over1S,
}

impl DurationBucket {
    pub const ALL: [DurationBucket; 5] = [
        DurationBucket::Sub100Us,
        DurationBucket::Us100To10Ms,
        DurationBucket::Ms10To100Ms,
        DurationBucket::Ms100To1S,
        DurationBucket::Over1S,
    ];

    /// Lower bounds in microseconds, inclusive, of every bucket but the first.
    pub const BOUNDARIES_US: [u64; 4] = [100, 10_000, 100_000, 1_000_000];

    pub fn of(duration_us: u64) -> Self {
        let idx = Self::BOUNDARIES_US
            .iter()
            .take_while(|&&b| duration_us >= b)
            .count();
        Self::ALL[idx]
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            DurationBucket::Sub100Us => "< 100 us",
            DurationBucket::Us100To10Ms => "100 us - 10 ms",
            DurationBucket::Ms10To100Ms => "10 ms - 100 ms",
            DurationBucket::Ms100To1S => "100 ms - 1 s",
            DurationBucket::Over1S => ">= 1 s",
        }
    }
}

impl fmt::Display for DurationBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "~{}", self.label())
    }
}

pub fn duration_bucket(duration_us: u64) -> DurationBucket {
    DurationBucket::of(duration_us)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(duration_bucket(50), DurationBucket::Sub100Us);
        assert_eq!(duration_bucket(300_000), DurationBucket::Ms100To1S);
        assert_eq!(duration_bucket(100), DurationBucket::Us100To10Ms);
    }

    #[test]
    fn boundaries_are_lower_inclusive() {
        for (i, &b) in DurationBucket::BOUNDARIES_US.iter().enumerate() {
            assert_eq!(duration_bucket(b - 1), DurationBucket::ALL[i]);
            assert_eq!(duration_bucket(b), DurationBucket::ALL[i + 1]);
        }
        assert_eq!(duration_bucket(0), DurationBucket::Sub100Us);
        assert_eq!(duration_bucket(u64::MAX), DurationBucket::Over1S);
    }
}
