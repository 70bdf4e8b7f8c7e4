use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::exploited_servers;

/// A key-dependent product term of the answer polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    /// `K_A[k] * B[j_b]`
    KeyAData { k: u64, j_b: u64 },
    /// `A[j_a] * K_B[k]`
    DataKeyB { j_a: u64, k: u64 },
    /// `K_A[k_a] * K_B[k_b]`
    KeyKey { k_a: u64, k_b: u64 },
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Term::KeyAData { k, j_b } => write!(f, "KA{k}*B{j_b}"),
            Term::DataKeyB { j_a, k } => write!(f, "A{j_a}*KB{k}"),
            Term::KeyKey { k_a, k_b } => write!(f, "KA{k_a}*KB{k_b}"),
        }
    }
}

/// Exponent of the desired block `A[j_a] B[j_b]`.
#[inline]
pub fn desired_exponent(r_a: u64, ell: u64, j_a: u64, j_b: u64) -> u64 {
    j_a + j_b * (r_a + ell)
}

/// Which product terms land on which exponent of the answer polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentMap {
    pub r_a: u64,
    pub r_b: u64,
    pub ell: u64,
    pub q: u64,
    /// exponent -> `(j_a, j_b)` block of the product
    pub desired: BTreeMap<u64, (u64, u64)>,
    /// exponent -> every key-dependent term on it
    pub interference: BTreeMap<u64, BTreeSet<Term>>,
}

/// Enumerates the four double sums of the answer polynomial and records the
/// exponent of every term.
pub fn build_exponent_map(r_a: u64, r_b: u64, ell: u64) -> ExponentMap {
    assert!(r_a >= 1 && r_b >= 1 && ell >= 1, "r_A, r_B, ell must be positive");
    let stride = r_a + ell;
    // offset of the last column-block row where the key-B terms start
    let tail = (r_b - 1) * stride;

    let mut desired = BTreeMap::new();
    for j_b in 0..r_b {
        for j_a in 0..r_a {
            let prev = desired.insert(desired_exponent(r_a, ell, j_a, j_b), (j_a, j_b));
            debug_assert!(prev.is_none(), "desired exponents collide");
        }
    }

    let mut interference: BTreeMap<u64, BTreeSet<Term>> = BTreeMap::new();
    let mut put = |e: u64, t: Term| {
        interference.entry(e).or_default().insert(t);
    };
    for k in 0..ell {
        for j_b in 0..r_b {
            put(k + r_a + j_b * stride, Term::KeyAData { k, j_b });
        }
    }
    for j_a in 0..r_a {
        for k in 0..ell {
            put(j_a + k + r_a + tail, Term::DataKeyB { j_a, k });
        }
    }
    for k_a in 0..ell {
        for k_b in 0..ell {
            put(k_a + k_b + 2 * r_a + tail, Term::KeyKey { k_a, k_b });
        }
    }

    ExponentMap {
        r_a,
        r_b,
        ell,
        q: exploited_servers(r_a, r_b, ell),
        desired,
        interference,
    }
}

impl ExponentMap {
    /// Exponents carrying two or more aligned interference terms.
    pub fn aligned_exponents(&self) -> impl Iterator<Item = u64> + '_ {
        self.interference
            .iter()
            .filter(|(_, terms)| terms.len() > 1)
            .map(|(&e, _)| e)
    }

    /// Checks that desired and interference exponents are disjoint and
    /// together cover exactly `0..Q`, with the expected counts.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(e) = self.desired.keys().find(|e| self.interference.contains_key(e)) {
            return Err(format!("exponent {e} carries both a desired block and interference"));
        }
        let covered: BTreeSet<u64> = self.desired.keys().chain(self.interference.keys()).copied().collect();
        let expected: BTreeSet<u64> = (0..self.q).collect();
        if covered != expected {
            let missing: Vec<_> = expected.difference(&covered).collect();
            let extra: Vec<_> = covered.difference(&expected).collect();
            return Err(format!(
                "coverage mismatch: missing {missing:?}, outside [0, Q) {extra:?}"
            ));
        }
        if self.desired.len() as u64 != self.r_a * self.r_b {
            return Err(format!("{} desired exponents, expected r_A r_B", self.desired.len()));
        }
        let want = self.ell * (self.r_b + 1) + self.r_a - 1;
        if self.interference.len() as u64 != want {
            return Err(format!(
                "{} interference exponents, expected ell(r_B+1)+r_A-1 = {want}",
                self.interference.len()
            ));
        }
        for (&e, &(j_a, j_b)) in &self.desired {
            if e != desired_exponent(self.r_a, self.ell, j_a, j_b) {
                return Err(format!("block ({j_a}, {j_b}) placed at {e}"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ExponentMap {
    /// One line per exponent, lowest first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in 0..self.q {
            if let Some((j_a, j_b)) = self.desired.get(&e) {
                writeln!(f, "{e:>5}  desired  A{j_a}*B{j_b}")?;
            } else if let Some(terms) = self.interference.get(&e) {
                let names: Vec<String> = terms.iter().map(Term::to_string).collect();
                writeln!(f, "{e:>5}  interf   {}", names.join(" "))?;
            } else {
                writeln!(f, "{e:>5}  (empty)")?;
            }
        }
        Ok(())
    }
}
