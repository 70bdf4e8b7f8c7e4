//! In-process cluster model.
//!
//! Each server finishes at tick `1 + delay`. The coordinator decodes from the
//! `Q` earliest finishers, ties going to the lower server index.

mod config;

pub use config::{parse_delay, StragglerConfig, StragglerModel};

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{decode, encode_padded, server_compute, Partition, SchemeParams};
use crate::error::{Error, Result};
use crate::ffield::FieldMatrix;
use crate::partition::{exhaustive_rate_opt, exhaustive_threshold_opt};

/// Time every server needs with zero delay.
pub const BASE_TICK: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: u64,
    pub ell: u64,
    pub partition: Partition,
    pub q: u64,
    /// 1-based, in completion order.
    pub responders_used: Vec<usize>,
    /// Tick of the `Q`-th completion; absent if fewer than `Q` servers ever finish.
    pub completion_tick: Option<f64>,
    pub decoded_ok: bool,
    pub stragglers_tolerated: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Server indices (1-based) ordered by finishing tick, unfinished ones dropped.
fn completion_order(delays: &[f64]) -> Vec<(usize, f64)> {
    let mut order: Vec<(usize, f64)> = delays
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .map(|(i, d)| (i + 1, BASE_TICK + d))
        .collect();
    order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    order
}

pub(crate) fn simulate_with_delays(
    a: &FieldMatrix,
    b: &FieldMatrix,
    part: Partition,
    params: &SchemeParams,
    delays: &[f64],
    seed: u64,
) -> Result<SimReport> {
    let ell = params.ell();
    let q = part.q(ell);
    let n = params.n();
    if q > n {
        return Err(Error::InfeasiblePartition { q, n });
    }
    let shares = encode_padded(a, b, part, params, seed)?;
    let answers = shares.par_iter().map(server_compute).collect::<Result<Vec<_>>>()?;

    let order = completion_order(delays);
    let used: Vec<(usize, f64)> = order.into_iter().take(q as usize).collect();
    let chosen: Vec<_> = used.iter().map(|&(i, _)| answers[i - 1].clone()).collect();
    let completion_tick = (used.len() == q as usize).then(|| used.last().map(|u| u.1)).flatten();

    let (decoded_ok, error) = match decode(&chosen, part, params, a.rows(), b.cols()) {
        Ok(product) => {
            let expect = a.mat_mul(b)?;
            if product == expect {
                (true, None)
            } else {
                (
                    false,
                    Some("decoded product differs from the plaintext product".to_string()),
                )
            }
        }
        Err(e @ Error::TooFewAnswers { .. }) => (false, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(SimReport {
        n,
        ell,
        partition: part,
        q,
        responders_used: used.iter().map(|u| u.0).collect(),
        completion_tick,
        decoded_ok,
        stragglers_tolerated: n - q,
        error,
    })
}

/// Encodes, lets every server compute, and decodes from the first `Q` finishers.
/// Keys come from `seed`, delays from the straggler config (first draw).
pub fn run_simulation(
    a: &FieldMatrix,
    b: &FieldMatrix,
    part: Partition,
    params: &SchemeParams,
    straggler: &StragglerConfig,
    seed: u64,
) -> Result<SimReport> {
    let delays = straggler.draw(params.n() as usize, 0)?;
    simulate_with_delays(a, b, part, params, &delays, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickStats {
    pub partition: Partition,
    pub q: u64,
    pub decoded: usize,
    /// Over the trials that completed.
    pub mean_tick: Option<f64>,
    pub min_tick: Option<f64>,
    pub max_tick: Option<f64>,
}

impl TickStats {
    fn from_reports(part: Partition, q: u64, reports: &[SimReport]) -> Self {
        let ticks: Vec<f64> = reports.iter().filter_map(|r| r.completion_tick).collect();
        let mean_tick = (!ticks.is_empty()).then(|| ticks.iter().sum::<f64>() / ticks.len() as f64);
        TickStats {
            partition: part,
            q,
            decoded: reports.iter().filter(|r| r.decoded_ok).count(),
            mean_tick,
            min_tick: ticks.iter().copied().reduce(f64::min),
            max_tick: ticks.iter().copied().reduce(f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub n: u64,
    pub ell: u64,
    pub rate_threshold: String,
    pub trials: usize,
    pub rate_optimal: TickStats,
    pub threshold_optimal: TickStats,
}

/// Rate-optimal against threshold-optimal partition, each trial feeding both
/// the same delay draw.
pub fn threshold_experiment(
    params: &SchemeParams,
    r_th: num_rational::Ratio<u64>,
    straggler: &StragglerConfig,
    trials: usize,
    seed: u64,
) -> Result<ThresholdSummary> {
    let (n, ell) = (params.n(), params.ell());
    let rate_part = exhaustive_rate_opt(n, ell)
        .map_err(|_| Error::InfeasibleRateThreshold(format!("no feasible partition for N={n}, ell={ell}")))?
        .partition();
    let thr_part = exhaustive_threshold_opt(n, ell, r_th)?.partition();
    let prime = params.prime();

    let runs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let delays = straggler.draw(n as usize, t as u64)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let inner = 2;
            let rows = (rate_part.r_a * thr_part.r_a) as usize;
            let cols = (rate_part.r_b * thr_part.r_b) as usize;
            let a = FieldMatrix::random(rows, inner, prime, &mut rng);
            let b = FieldMatrix::random(inner, cols, prime, &mut rng);
            let key_seed = seed.wrapping_add(t as u64);
            Ok((
                simulate_with_delays(&a, &b, rate_part, params, &delays, key_seed)?,
                simulate_with_delays(&a, &b, thr_part, params, &delays, key_seed)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rate_runs, thr_runs): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    Ok(ThresholdSummary {
        n,
        ell,
        rate_threshold: r_th.to_string(),
        trials,
        rate_optimal: TickStats::from_reports(rate_part, rate_part.q(ell), &rate_runs),
        threshold_optimal: TickStats::from_reports(thr_part, thr_part.q(ell), &thr_runs),
    })
}
