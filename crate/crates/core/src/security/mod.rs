//! Collusion checks for the encoding.
//!
//! The key part of what a coalition `L` sees is `M_A K_A` and `M_B K_B`, with
//! `M_A = [x_i^(k+r_A)]` and `M_B = [x_i^(k+r_A+(r_B-1)(r_A+ell))]`. Both being
//! invertible makes the shares a one-time pad of the inputs.
//! [`leakage_oracle`] confirms this by brute force on toy fields.

use std::collections::HashMap;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::scheme::{encode_blocks, KeyMaterial};
use crate::codec::SchemeParams;
use crate::error::{Error, Result};
use crate::ffield::{FieldMatrix, FieldPrime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetMode {
    AllSubsets,
    /// `count` subsets drawn uniformly (with replacement across draws).
    Sampled {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollusionReport {
    pub ell: u64,
    pub subsets_checked: u64,
    pub all_invertible: bool,
    /// 1-based server indices of the first subset that failed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failing_subset: Option<Vec<usize>>,
}

/// Masking matrices seen by the servers in `subset` (0-based indices).
pub fn masking_matrices(params: &SchemeParams, r_a: u64, r_b: u64, subset: &[usize]) -> (FieldMatrix, FieldMatrix) {
    raw_masking_matrices(params.prime(), params.ell(), params.points(), r_a, r_b, subset)
}

fn raw_masking_matrices(
    prime: FieldPrime,
    ell: u64,
    points: &[u64],
    r_a: u64,
    r_b: u64,
    subset: &[usize],
) -> (FieldMatrix, FieldMatrix) {
    let tail = (r_b - 1) * (r_a + ell);
    let build = |offset: u64| {
        let rows: Vec<Vec<u64>> = subset
            .iter()
            .map(|&i| {
                let x = points[i];
                (0..ell).map(|k| prime.pow(x, k + offset)).collect()
            })
            .collect();
        FieldMatrix::from_rows(prime, &rows).expect("square matrix of reduced entries")
    };
    (build(r_a), build(r_a + tail))
}

fn subset_ok(prime: FieldPrime, ell: u64, points: &[u64], r_a: u64, r_b: u64, subset: &[usize]) -> bool {
    let (m_a, m_b) = raw_masking_matrices(prime, ell, points, r_a, r_b, subset);
    m_a.is_invertible().unwrap_or(false) && m_b.is_invertible().unwrap_or(false)
}

const CHUNK: usize = 4096;

/// Checks invertibility of both masking matrices for `ell`-subsets of the servers.
pub fn masking_matrix_check(params: &SchemeParams, r_a: u64, r_b: u64, mode: SubsetMode) -> Result<CollusionReport> {
    check_points(params.prime(), params.ell(), params.points(), r_a, r_b, mode)
}

/// As [`masking_matrix_check`] but over unvalidated points.
fn check_points(
    prime: FieldPrime,
    ell_u: u64,
    points: &[u64],
    r_a: u64,
    r_b: u64,
    mode: SubsetMode,
) -> Result<CollusionReport> {
    if r_a == 0 || r_b == 0 {
        return Err(Error::InvalidParams("block counts must be positive".into()));
    }
    let n = points.len();
    let ell = ell_u as usize;
    let mut subsets: Box<dyn Iterator<Item = Vec<usize>>> = match mode {
        SubsetMode::AllSubsets => Box::new((0..n).combinations(ell)),
        SubsetMode::Sampled { count, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Box::new((0..count).map(move |_| {
                let mut s = sample(&mut rng, n, ell).into_vec();
                s.sort_unstable();
                s
            }))
        }
    };

    let mut checked = 0u64;
    loop {
        let chunk: Vec<Vec<usize>> = subsets.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let failed = chunk
            .par_iter()
            .position_first(|s| !subset_ok(prime, ell_u, points, r_a, r_b, s));
        if let Some(pos) = failed {
            checked += pos as u64 + 1;
            return Ok(CollusionReport {
                ell: ell_u,
                subsets_checked: checked,
                all_invertible: false,
                failing_subset: Some(chunk[pos].iter().map(|i| i + 1).collect()),
            });
        }
        checked += chunk.len() as u64;
    }
    Ok(CollusionReport {
        ell: ell_u,
        subsets_checked: checked,
        all_invertible: true,
        failing_subset: None,
    })
}

/// Parameters small enough to enumerate every input and key: scalar
/// inputs, `r_A = r_B = 1`, `q <= 5`, `ell <= 2`, `N <= 4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TinyBox {
    prime: FieldPrime,
    ell: u64,
    points: Vec<u64>,
}

impl TinyBox {
    /// Default points `1..=N`.
    pub fn new(q: u64, n: u64, ell: u64) -> Result<Self> {
        if q <= n {
            return Err(Error::ParameterBoxTooLarge(format!(
                "GF({q}) has fewer than N={n} distinct nonzero points"
            )));
        }
        TinyBox::with_points(q, ell, (1..=n).collect())
    }

    /// Arbitrary distinct points, zero included. A zero point hands that
    /// server `A` and `B` in the clear, which makes a useful negative control.
    pub fn with_points(q: u64, ell: u64, points: Vec<u64>) -> Result<Self> {
        let n = points.len() as u64;
        if q > 5 || ell == 0 || ell > 2 || n > 4 || ell > n {
            return Err(Error::ParameterBoxTooLarge(format!(
                "need q <= 5, 1 <= ell <= min(2, N), N <= 4; got q={q}, ell={ell}, N={n}"
            )));
        }
        let prime = FieldPrime::new(q)?;
        if !points.iter().all(|&x| x < q) || !points.iter().all_unique() {
            return Err(Error::ParameterBoxTooLarge(format!(
                "points {points:?} are not distinct residues mod {q}"
            )));
        }
        Ok(TinyBox { prime, ell, points })
    }
}

/// For every `ell`-subset, tabulates the joint distribution of the subset's
/// shares over all key tuples, for each input pair `(A, B)` in GF(q)^2.
/// True iff every input pair yields the same distribution, i.e. the
/// coalition's view carries exactly zero information about the inputs.
pub fn leakage_oracle(tiny: &TinyBox) -> Result<bool> {
    let prime = tiny.prime;
    let q = prime.modulus();
    let ell = tiny.ell as usize;
    let scalar = |v: u64| FieldMatrix::new(1, 1, prime, vec![v]).expect("residue");

    // views[input][subset] -> histogram of the coalition's shares
    let mut reference: Option<Vec<HashMap<Vec<u64>, u64>>> = None;
    for (a, b) in (0..q).cartesian_product(0..q) {
        let subsets: Vec<Vec<usize>> = (0..tiny.points.len()).combinations(ell).collect();
        let mut hist = vec![HashMap::new(); subsets.len()];
        for key in (0..2 * ell).map(|_| 0..q).multi_cartesian_product() {
            let keys = KeyMaterial {
                a: key[..ell].iter().map(|&k| scalar(k)).collect(),
                b: key[ell..].iter().map(|&k| scalar(k)).collect(),
            };
            let shares = encode_blocks(&[scalar(a)], &[scalar(b)], &keys, prime, &tiny.points)?;
            for (s, h) in subsets.iter().zip(hist.iter_mut()) {
                let view: Vec<u64> = s
                    .iter()
                    .flat_map(|&i| [shares[i].a_tilde.get(0, 0), shares[i].b_tilde.get(0, 0)])
                    .collect();
                *h.entry(view).or_insert(0u64) += 1;
            }
        }
        match &reference {
            None => reference = Some(hist),
            Some(r) if *r != hist => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}
