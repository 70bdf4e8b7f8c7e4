use std::cmp::Ordering;

use num_integer::Roots;
use num_rational::Ratio;

use super::{Method, OptimizationResult, RationalRate};
use crate::codec::{exploited_servers, max_collusion};
use crate::error::{Error, Result};

fn check_collusion(n: u64, ell: u64) -> Result<()> {
    if ell == 0 || ell > max_collusion(n) {
        return Err(Error::NoFeasiblePartition { n, ell });
    }
    Ok(())
}

/// Every feasible pair: `r_B <= (N+1)/(1+ell) - 1`, and for each `r_B`,
/// `r_A <= (N+1)/(r_B+1) - ell`.
fn feasible_pairs(n: u64, ell: u64) -> impl Iterator<Item = (u64, u64)> {
    let max_r_b = ((n + 1) / (1 + ell)).saturating_sub(1);
    (1..=max_r_b).flat_map(move |r_b| {
        let max_r_a = ((n + 1) / (r_b + 1)).saturating_sub(ell);
        (1..=max_r_a).map(move |r_a| (r_a, r_b))
    })
}

/// Maximises `r_A r_B / Q` over every feasible pair.
///
/// Ties go to the smaller `Q`, then the larger `r_A`.
pub fn exhaustive_rate_opt(n: u64, ell: u64) -> Result<OptimizationResult> {
    check_collusion(n, ell)?;
    let better = |a: &OptimizationResult, b: &OptimizationResult| {
        a.rate.cmp(&b.rate).then(b.q.cmp(&a.q)).then(a.r_a.cmp(&b.r_a))
    };
    feasible_pairs(n, ell)
        .map(|(r_a, r_b)| OptimizationResult::from_pair(r_a, r_b, n, ell, Method::Exhaustive))
        .max_by(better)
        .ok_or(Error::NoFeasiblePartition { n, ell })
}

/// `max{1, ceil(-3/2 + sqrt(1/4 + N/ell))}`.
///
/// Squaring shows the ceiling is the smallest `k` with `ell (k+1)(k+2) >= N`;
/// an integer square root gives the starting guess and that predicate makes it exact.
pub fn theorem1_r_b(n: u64, ell: u64) -> u64 {
    assert!(ell > 0);
    let reaches = |k: u64| ell as u128 * (k as u128 + 1) * (k as u128 + 2) >= n as u128;
    // sqrt(1/4 + N/ell) = sqrt(4N + ell) / (2 sqrt(ell)) ~ sqrt((4N + ell) / ell) / 2
    let root = ((4 * n as u128 + ell as u128) / ell as u128).sqrt() as u64;
    let mut k = (root.saturating_sub(3) / 2).max(1);
    while k > 1 && reaches(k - 1) {
        k -= 1;
    }
    while !reaches(k) {
        k += 1;
    }
    k
}

/// Closed-form estimate for the rate problem: `r_B` from [`theorem1_r_b`], then
/// the largest `r_A >= 1` with `Q <= N`.
pub fn theorem1_estimate(n: u64, ell: u64) -> Result<OptimizationResult> {
    check_collusion(n, ell)?;
    let r_b = theorem1_r_b(n, ell);
    let r_a = ((n + 1) / (r_b + 1)).saturating_sub(ell).max(1);
    Ok(OptimizationResult::from_pair(r_a, r_b, n, ell, Method::Theorem1))
}

/// `Q(r_A, r_B) <= N` and neither coordinate can grow by one without breaking it.
pub fn is_strongly_feasible(n: u64, ell: u64, r_a: u64, r_b: u64) -> bool {
    exploited_servers(r_a, r_b, ell) <= n
        && exploited_servers(r_a + 1, r_b, ell) > n
        && exploited_servers(r_a, r_b + 1, ell) > n
}

/// `N / (m (m+1))`: the collusion level near which the rate-optimal `r_B`
/// steps up to `m`.
pub fn breakpoint_estimate(n: u64, m: u64) -> Ratio<u64> {
    assert!(m >= 1);
    Ratio::new(n, m * (m + 1))
}

/// Best `r_A = r_B` partition.
pub fn equal_partition_opt(n: u64, ell: u64) -> Option<(u64, RationalRate)> {
    let mut best = None;
    let mut r = 1;
    while exploited_servers(r, r, ell) <= n {
        best = Some((r, RationalRate::new(r * r, exploited_servers(r, r, ell))));
        r += 1;
    }
    best
}

fn check_threshold(n: u64, ell: u64, r_th: Ratio<u64>) -> Result<RationalRate> {
    if *r_th.numer() == 0 || r_th >= Ratio::from_integer(1) {
        return Err(Error::InfeasibleRateThreshold(format!("{r_th} must lie in (0, 1)")));
    }
    let best = exhaustive_rate_opt(n, ell)
        .map_err(|_| Error::InfeasibleRateThreshold(format!("no feasible partition for N={n}, ell={ell}")))?;
    if !best.rate.at_least(r_th) {
        return Err(Error::InfeasibleRateThreshold(format!(
            "{r_th} exceeds the optimal rate {} for N={n}, ell={ell}",
            best.rate
        )));
    }
    Ok(best.rate)
}

/// Minimises `Q` subject to rate `>= r_th` and `Q <= N`.
///
/// Ties go to the higher rate, then the larger `r_A`.
pub fn exhaustive_threshold_opt(n: u64, ell: u64, r_th: Ratio<u64>) -> Result<OptimizationResult> {
    check_threshold(n, ell, r_th)?;
    let better = |a: &OptimizationResult, b: &OptimizationResult| -> Ordering {
        b.q.cmp(&a.q).then(a.rate.cmp(&b.rate)).then(a.r_a.cmp(&b.r_a))
    };
    feasible_pairs(n, ell)
        .map(|(r_a, r_b)| OptimizationResult::from_pair(r_a, r_b, n, ell, Method::Exhaustive))
        .filter(|c| c.rate.at_least(r_th))
        .max_by(better)
        .ok_or_else(|| Error::InfeasibleRateThreshold(r_th.to_string()))
}

/// `max{1, ceil(2/(1 - R) - 2)}`, which for `R = a/b` is `max{1, ceil(2a/(b-a))}`.
pub fn theorem2_r_b(r_th: Ratio<u64>) -> u64 {
    let (a, b) = (*r_th.numer(), *r_th.denom());
    assert!(a < b, "rate threshold must be below 1");
    (2 * a).div_ceil(b - a).max(1)
}

/// Smallest `r_A >= 1` reaching rate `r_th` with the given `r_B`.
///
/// Rearranging `r_A r_B / ((r_A+ell)(r_B+1)-1) >= a/b` gives
/// `r_A (b r_B - a (r_B+1)) >= a (ell (r_B+1) - 1)`, so no `r_A` exists once
/// `r_th >= r_B / (r_B+1)`.
pub fn smallest_satisfying_r_a(r_b: u64, ell: u64, r_th: Ratio<u64>) -> Result<u64> {
    let (a, b) = (*r_th.numer() as u128, *r_th.denom() as u128);
    let (r_b_w, ell_w) = (r_b as u128, ell as u128);
    let slope = (b * r_b_w) as i128 - (a * (r_b_w + 1)) as i128;
    if slope <= 0 {
        return Err(Error::NoSatisfyingRA {
            r_b,
            rate: r_th.to_string(),
        });
    }
    let need = a * (ell_w * (r_b_w + 1) - 1);
    Ok((need.div_ceil(slope as u128) as u64).max(1))
}

/// Closed-form estimate for the threshold problem. `feasible` is false when
/// the estimated pair needs more than `N` servers.
pub fn theorem2_estimate(n: u64, ell: u64, r_th: Ratio<u64>) -> Result<OptimizationResult> {
    check_threshold(n, ell, r_th)?;
    let r_b = theorem2_r_b(r_th);
    let r_a = smallest_satisfying_r_a(r_b, ell, r_th)?;
    Ok(OptimizationResult::from_pair(r_a, r_b, n, ell, Method::Theorem2))
}
