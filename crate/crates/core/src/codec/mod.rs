//! Aligned secret sharing: partition `A` into `r_A` row blocks and `B` into
//! `r_B` column blocks, mask both with `ell` uniform key blocks, and place
//! every product term on an exponent of the evaluation variable so that the
//! desired block products `A_j B_j'` sit on exponents of their own while the
//! key-dependent terms share (align on) the rest.
//!
//! Block and key indices are 0-based throughout this crate; server indices
//! are 1-based.

mod exponent;
pub(crate) mod scheme;
mod wire;

pub use exponent::{build_exponent_map, desired_exponent, ExponentMap, Term};
pub use scheme::{
    decode, encode, encode_padded, encode_with_keys, server_compute, split_inputs, Answer, KeyMaterial, Padding,
    SharePair,
};
pub use wire::{read_frame, write_frame, FRAME_HEADER_LEN, FRAME_MAGIC, FRAME_VERSION};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::FieldPrime;
use crate::partition::RationalRate;

/// Number of distinct exponents in the product polynomial, `(r_A + ell)(r_B + 1) - 1`.
#[inline]
pub fn exploited_servers(r_a: u64, r_b: u64, ell: u64) -> u64 {
    (r_a + ell) * (r_b + 1) - 1
}

/// How `A` (rows) and `B` (columns) are split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    pub r_a: u64,
    pub r_b: u64,
}

impl Partition {
    pub fn new(r_a: u64, r_b: u64) -> Result<Self> {
        if r_a == 0 || r_b == 0 {
            return Err(Error::InvalidParams(format!(
                "partition counts must be positive, got ({r_a}, {r_b})"
            )));
        }
        Ok(Partition { r_a, r_b })
    }

    pub fn q(self, ell: u64) -> u64 {
        exploited_servers(self.r_a, self.r_b, ell)
    }

    pub fn rate(self, ell: u64) -> RationalRate {
        RationalRate::new(self.r_a * self.r_b, self.q(ell))
    }

    pub fn is_feasible(self, n: u64, ell: u64) -> bool {
        self.q(ell) <= n
    }
}

/// Recovery threshold of the scheme: any `Q` answers decode, fewer do not.
pub fn recovery_threshold(part: Partition, ell: u64) -> u64 {
    part.q(ell)
}

/// Largest collusion level with a feasible partition, `floor((N - 1) / 2)`.
pub fn max_collusion(n: u64) -> u64 {
    n.saturating_sub(1) / 2
}

/// Server count, collusion level, field and evaluation points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    n: u64,
    ell: u64,
    prime: FieldPrime,
    points: Vec<u64>,
}

impl SchemeParams {
    /// Default points `x_i = i` for `i = 1..=N`; needs `q > N`.
    pub fn new(n: u64, ell: u64, prime: FieldPrime) -> Result<Self> {
        if n >= prime.modulus() {
            return Err(Error::InvalidParams(format!(
                "field of size {prime} has fewer than N={n} distinct nonzero points"
            )));
        }
        SchemeParams::with_points(ell, prime, (1..=n).collect())
    }

    pub fn with_points(ell: u64, prime: FieldPrime, points: Vec<u64>) -> Result<Self> {
        let n = points.len() as u64;
        if n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if ell == 0 || ell > n {
            return Err(Error::InvalidParams(format!("ell={ell} must lie in [1, N={n}]")));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for &x in &points {
            if x == 0 || x >= prime.modulus() {
                return Err(Error::InvalidParams(format!(
                    "evaluation point {x} must be a nonzero residue mod {prime}"
                )));
            }
            if !seen.insert(x) {
                return Err(Error::DuplicateEvaluationPoint(x));
            }
        }
        if ell > max_collusion(n) {
            log::warn!(
                "ell={ell} exceeds floor((N-1)/2)={} for N={n}; no partition is feasible",
                max_collusion(n)
            );
        }
        Ok(SchemeParams { n, ell, prime, points })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn prime(&self) -> FieldPrime {
        self.prime
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    /// Evaluation point of a 1-based server index.
    pub fn point(&self, server_index: usize) -> Option<u64> {
        server_index.checked_sub(1).and_then(|i| self.points.get(i).copied())
    }

    pub fn is_usable(&self) -> bool {
        self.ell <= max_collusion(self.n)
    }

    pub(crate) fn check_feasible(&self, part: Partition) -> Result<()> {
        let q = part.q(self.ell);
        if q > self.n {
            return Err(Error::InfeasiblePartition { q, n: self.n });
        }
        Ok(())
    }
}
