//! Choosing `(r_A, r_B)`.
//!
//! Two problems over positive integer pairs with `Q = (r_A+ell)(r_B+1)-1 <= N`:
//! maximise the rate `r_A r_B / Q`, or minimise `Q` subject to a rate floor.
//! Each has an exhaustive solver (the reference) and a closed-form estimate.
//! All rate comparisons are exact.

mod decimal;
mod search;
mod sweep;

pub use decimal::{decimal_17, parse_ratio};
pub use search::{
    breakpoint_estimate, equal_partition_opt, exhaustive_rate_opt, exhaustive_threshold_opt, is_strongly_feasible,
    smallest_satisfying_r_a, theorem1_estimate, theorem1_r_b, theorem2_estimate, theorem2_r_b,
};
pub use sweep::{gap_sweep, rate_sweep, write_records, GapRecord, GapRow, GapSweep, RateRecord, RateRow};

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::codec::Partition;

/// `num / den` kept unreduced (`r_A r_B` over `Q`); ordered by cross-multiplication.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RationalRate {
    pub num: u64,
    pub den: u64,
}

impl RationalRate {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "rate denominator must be positive");
        RationalRate { num, den }
    }

    pub fn to_ratio(self) -> Ratio<u64> {
        Ratio::new(self.num, self.den)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn decimal(self) -> String {
        decimal_17(self.num as u128, self.den as u128)
    }

    /// `self >= r` for an arbitrary non-negative fraction.
    pub fn at_least(self, r: Ratio<u64>) -> bool {
        self.num as u128 * *r.denom() as u128 >= *r.numer() as u128 * self.den as u128
    }

    /// Exact `self - other` as a signed fraction.
    pub fn minus(self, other: RationalRate) -> Ratio<i128> {
        Ratio::new(self.num as i128, self.den as i128) - Ratio::new(other.num as i128, other.den as i128)
    }
}

impl PartialEq for RationalRate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RationalRate {}

impl PartialOrd for RationalRate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalRate {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for RationalRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Theorem1,
    Theorem2,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exhaustive => "exhaustive",
            Method::Theorem1 => "theorem1",
            Method::Theorem2 => "theorem2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub r_a: u64,
    pub r_b: u64,
    pub q: u64,
    pub rate: RationalRate,
    pub method: Method,
    /// `Q <= N`. Estimates may land outside the feasible set.
    pub feasible: bool,
}

impl OptimizationResult {
    pub(crate) fn from_pair(r_a: u64, r_b: u64, n: u64, ell: u64, method: Method) -> Self {
        let part = Partition { r_a, r_b };
        let q = part.q(ell);
        OptimizationResult {
            r_a,
            r_b,
            q,
            rate: part.rate(ell),
            method,
            feasible: q <= n,
        }
    }

    pub fn partition(&self) -> Partition {
        Partition {
            r_a: self.r_a,
            r_b: self.r_b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ordering() {
        let a = RationalRate::new(810, 999);
        let b = RationalRate::new(270, 333);
        assert_eq!(a, b);
        assert!(RationalRate::new(1, 3) < RationalRate::new(4, 8));
        assert!(a.at_least(Ratio::new(30, 37)));
        assert!(!RationalRate::new(1, 3).at_least(Ratio::new(1, 2)));
        assert_eq!(RationalRate::new(1, 2).minus(RationalRate::new(1, 3)), Ratio::new(1, 6));
        assert_eq!(a.to_string(), "810/999");
    }

    #[test]
    fn ordering_distinguishes_close_fractions() {
        // the two differ by about 1e-12
        let x = RationalRate::new(999_999, 1_000_000);
        let y = RationalRate::new(999_998, 999_999);
        assert!(x > y);
    }
}
