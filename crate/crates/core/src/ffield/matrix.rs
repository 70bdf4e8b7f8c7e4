use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FieldElement, FieldPrime};
use crate::error::{Error, Result};

/// Dense row-major matrix over GF(q). Every entry is a canonical residue of
/// the single `prime` the matrix carries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    prime: FieldPrime,
    data: Vec<u64>,
}

impl FieldMatrix {
    /// Builds a matrix from row-major values, reducing each modulo q.
    pub fn new(rows: usize, cols: usize, prime: FieldPrime, data: Vec<u64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        let data = data.into_iter().map(|v| prime.reduce(v)).collect();
        Ok(FieldMatrix {
            rows,
            cols,
            prime,
            data,
        })
    }

    pub fn from_rows(prime: FieldPrime, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        FieldMatrix::new(rows.len(), cols, prime, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize, prime: FieldPrime) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        FieldMatrix {
            rows,
            cols,
            prime,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, prime: FieldPrime) -> Self {
        let mut m = FieldMatrix::zeros(n, n, prime);
        for i in 0..n {
            m.data[i * n + i] = 1 % prime.modulus();
        }
        m
    }

    /// Entries drawn uniformly from GF(q).
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, prime: FieldPrime, rng: &mut R) -> Self {
        let q = prime.modulus();
        let data = (0..rows * cols).map(|_| rng.gen_range(0..q)).collect();
        FieldMatrix::new(rows, cols, prime, data).expect("dimensions checked by caller")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn prime(&self) -> FieldPrime {
        self.prime
    }

    /// Row-major residues.
    pub fn data(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = self.prime.reduce(v);
    }

    pub fn element(&self, r: usize, c: usize) -> FieldElement {
        self.prime.element(self.get(r, c))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_prime(&self, other: &FieldMatrix) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::MismatchedField {
                left: self.prime.modulus(),
                right: other.prime.modulus(),
            });
        }
        Ok(())
    }

    /// Standard product over GF(q).
    pub fn mat_mul(&self, rhs: &FieldMatrix) -> Result<FieldMatrix> {
        self.check_prime(rhs)?;
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let q = self.prime.modulus() as u128;
        let mut out = vec![0u64; self.rows * rhs.cols];
        let mut acc = vec![0u128; rhs.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u128;
                if a == 0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (slot, &b) in acc.iter_mut().zip(row) {
                    // each product is < q^2 < 2^128; reduce lazily to keep the sum in range
                    *slot = (*slot + a * b as u128) % q;
                }
            }
            for (o, &a) in out[i * rhs.cols..(i + 1) * rhs.cols].iter_mut().zip(&acc) {
                *o = a as u64;
            }
        }
        Ok(FieldMatrix {
            rows: self.rows,
            cols: rhs.cols,
            prime: self.prime,
            data: out,
        })
    }

    /// `self += scale * other`.
    pub fn add_scaled_assign(&mut self, other: &FieldMatrix, scale: u64) -> Result<()> {
        self.check_prime(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} to {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        let p = self.prime;
        let s = p.reduce(scale);
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x = p.add(*x, p.mul(s, y));
        }
        Ok(())
    }

    /// Rows `[start, start + count)` as a new matrix.
    pub fn row_block(&self, start: usize, count: usize) -> FieldMatrix {
        assert!(start + count <= self.rows && count > 0);
        FieldMatrix {
            rows: count,
            cols: self.cols,
            prime: self.prime,
            data: self.data[start * self.cols..(start + count) * self.cols].to_vec(),
        }
    }

    /// Columns `[start, start + count)` as a new matrix.
    pub fn col_block(&self, start: usize, count: usize) -> FieldMatrix {
        assert!(start + count <= self.cols && count > 0);
        let data = (0..self.rows)
            .flat_map(|r| {
                self.data[r * self.cols + start..r * self.cols + start + count]
                    .iter()
                    .copied()
            })
            .collect();
        FieldMatrix {
            rows: self.rows,
            cols: count,
            prime: self.prime,
            data,
        }
    }

    /// Copy with rows and columns zero-extended (or truncated) to the given shape.
    pub fn resized(&self, rows: usize, cols: usize) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(rows, cols, self.prime);
        for r in 0..rows.min(self.rows) {
            for c in 0..cols.min(self.cols) {
                out.data[r * cols + c] = self.get(r, c);
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination with row pivoting.
    pub fn determinant(&self) -> Result<u64> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let p = self.prime;
        let n = self.rows;
        let mut m = self.data.clone();
        let mut prev = 1 % p.modulus();
        let mut negate = false;
        for k in 0..n.saturating_sub(1) {
            if m[k * n + k] == 0 {
                match (k + 1..n).find(|&r| m[r * n + k] != 0) {
                    Some(r) => {
                        for c in 0..n {
                            m.swap(k * n + c, r * n + c);
                        }
                        negate = !negate;
                    }
                    None => return Ok(0),
                }
            }
            let pivot = m[k * n + k];
            let prev_inv = p.inv(prev)?;
            for i in k + 1..n {
                let lead = m[i * n + k];
                for j in k + 1..n {
                    let v = p.sub(p.mul(pivot, m[i * n + j]), p.mul(lead, m[k * n + j]));
                    m[i * n + j] = p.mul(v, prev_inv);
                }
                m[i * n + k] = 0;
            }
            prev = pivot;
        }
        let det = m[n * n - 1];
        Ok(if negate { p.neg(det) } else { det })
    }

    pub fn is_invertible(&self) -> Result<bool> {
        Ok(self.determinant()? != 0)
    }
}
