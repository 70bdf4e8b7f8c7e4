use num_integer::Roots;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use super::search::{equal_partition_opt, exhaustive_rate_opt, theorem1_estimate};
use super::{decimal_17, RationalRate};
use crate::codec::max_collusion;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapRow {
    pub ell: u64,
    pub optimal_rate: RationalRate,
    pub estimate_rate: RationalRate,
    /// Exact `optimal_rate - estimate_rate`.
    pub additive_gap: Ratio<i128>,
    pub estimate_suboptimal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapSweep {
    pub n: u64,
    pub rows: Vec<GapRow>,
    pub max_gap: Ratio<i128>,
    pub suboptimal_count: usize,
}

/// Flat form of a [`GapRow`] shared by the CSV and JSON outputs.
#[derive(Debug, Clone, Serialize)]
pub struct GapRecord {
    pub ell: u64,
    pub optimal_rate: String,
    pub optimal_rate_decimal: String,
    pub estimate_rate: String,
    pub estimate_rate_decimal: String,
    pub additive_gap: String,
    pub additive_gap_decimal: String,
    pub estimate_suboptimal: bool,
}

fn ratio_text(r: Ratio<i128>) -> (String, String) {
    let (num, den) = (*r.numer(), *r.denom());
    assert!(num >= 0 && den > 0);
    (format!("{num}/{den}"), decimal_17(num as u128, den as u128))
}

impl GapRow {
    pub fn record(&self) -> GapRecord {
        let (additive_gap, additive_gap_decimal) = ratio_text(self.additive_gap);
        GapRecord {
            ell: self.ell,
            optimal_rate: self.optimal_rate.to_string(),
            optimal_rate_decimal: self.optimal_rate.decimal(),
            estimate_rate: self.estimate_rate.to_string(),
            estimate_rate_decimal: self.estimate_rate.decimal(),
            additive_gap,
            additive_gap_decimal,
            estimate_suboptimal: self.estimate_suboptimal,
        }
    }
}

impl GapSweep {
    pub fn records(&self) -> Vec<GapRecord> {
        self.rows.iter().map(GapRow::record).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (max_gap, max_gap_decimal) = ratio_text(self.max_gap);
        serde_json::json!({
            "n": self.n,
            "rows": self.records(),
            "max_gap": max_gap,
            "max_gap_decimal": max_gap_decimal,
            "suboptimal_count": self.suboptimal_count,
        })
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        write_records(out, &self.records())
    }
}

/// Exhaustive optimum against the closed-form estimate for every
/// `ell in [1, (N-1)/2]`.
pub fn gap_sweep(n: u64) -> GapSweep {
    assert!(n >= 3, "gap sweep needs N >= 3");
    let rows: Vec<GapRow> = (1..=max_collusion(n))
        .into_par_iter()
        .map(|ell| {
            let best = exhaustive_rate_opt(n, ell).expect("ell within the collusion limit");
            let est = theorem1_estimate(n, ell).expect("ell within the collusion limit");
            let gap = best.rate.minus(est.rate);
            GapRow {
                ell,
                optimal_rate: best.rate,
                estimate_rate: est.rate,
                additive_gap: gap,
                estimate_suboptimal: gap > Ratio::from_integer(0),
            }
        })
        .collect();
    let max_gap = rows.iter().map(|r| r.additive_gap).max().unwrap_or_default();
    let suboptimal_count = rows.iter().filter(|r| r.estimate_suboptimal).count();
    GapSweep {
        n,
        rows,
        max_gap,
        suboptimal_count,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateRow {
    pub ell: u64,
    /// `None` once no partition fits (`ell > (N-1)/2`).
    pub exhaustive: Option<RationalRate>,
    pub theorem1: Option<RationalRate>,
    pub equal_partition: Option<RationalRate>,
    pub one_sided_bound: RationalRate,
    /// `ell <= floor(sqrt(N) - 1)`, the tolerance of the square-grid scheme.
    pub ct_tolerant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRecord {
    pub ell: u64,
    pub exhaustive_rate: String,
    pub exhaustive_rate_decimal: String,
    pub theorem1_rate: String,
    pub theorem1_rate_decimal: String,
    pub equal_partition_rate: String,
    pub equal_partition_rate_decimal: String,
    pub one_sided_bound: String,
    pub one_sided_bound_decimal: String,
    pub ct_tolerant: bool,
}

fn rate_text(r: Option<RationalRate>) -> (String, String) {
    match r {
        Some(r) => (r.to_string(), r.decimal()),
        None => ("0/1".to_string(), "0".to_string()),
    }
}

impl RateRow {
    pub fn record(&self) -> RateRecord {
        let (exhaustive_rate, exhaustive_rate_decimal) = rate_text(self.exhaustive);
        let (theorem1_rate, theorem1_rate_decimal) = rate_text(self.theorem1);
        let (equal_partition_rate, equal_partition_rate_decimal) = rate_text(self.equal_partition);
        let (one_sided_bound, one_sided_bound_decimal) = rate_text(Some(self.one_sided_bound));
        RateRecord {
            ell: self.ell,
            exhaustive_rate,
            exhaustive_rate_decimal,
            theorem1_rate,
            theorem1_rate_decimal,
            equal_partition_rate,
            equal_partition_rate_decimal,
            one_sided_bound,
            one_sided_bound_decimal,
            ct_tolerant: self.ct_tolerant,
        }
    }
}

/// Rates of every strategy for `ell in [1, N]`.
pub fn rate_sweep(n: u64) -> Vec<RateRow> {
    assert!(n >= 3, "rate sweep needs N >= 3");
    let ct_limit = n.sqrt() - 1;
    (1..=n)
        .into_par_iter()
        .map(|ell| RateRow {
            ell,
            exhaustive: exhaustive_rate_opt(n, ell).ok().map(|r| r.rate),
            theorem1: theorem1_estimate(n, ell).ok().map(|r| r.rate),
            equal_partition: equal_partition_opt(n, ell).map(|(_, r)| r),
            one_sided_bound: RationalRate::new(n - ell, n),
            ct_tolerant: ell <= ct_limit,
        })
        .collect()
}

pub fn write_records<W: std::io::Write, R: Serialize>(out: W, records: &[R]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
