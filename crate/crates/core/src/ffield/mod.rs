//! Exact arithmetic over prime fields GF(q).
//!
//! [`FieldPrime`] carries the modulus and the raw arithmetic on canonical
//! `u64` residues; [`FieldElement`] pairs a residue with its field for the
//! value-level API. Matrices ([`FieldMatrix`]) and polynomials store raw
//! residues next to a single shared prime.

mod matrix;
mod poly;
mod text;

pub use matrix::FieldMatrix;
pub use poly::{evaluate, interpolate, interpolate_raw, Interpolator};
pub use text::{format_matrix, parse_matrix, read_matrix, write_matrix};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2^31 - 1.
pub const MERSENNE_31: u64 = (1 << 31) - 1;

/// A prime modulus, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldPrime(u64);

impl FieldPrime {
    pub fn new(q: u64) -> Result<Self> {
        if is_prime(q) {
            Ok(FieldPrime(q))
        } else {
            Err(Error::NotPrime(q))
        }
    }

    pub fn mersenne31() -> Self {
        FieldPrime(MERSENNE_31)
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u64 {
        v % self.0
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.0 as u128) as u64
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.0 - (b - a)
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    pub fn pow(self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.0;
        let mut b = base % self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by Fermat: a^(q-2).
    pub fn inv(self, a: u64) -> Result<u64> {
        if a.is_multiple_of(self.0) {
            return Err(Error::InversionOfZero);
        }
        Ok(self.pow(a, self.0 - 2))
    }

    pub fn element(self, v: u64) -> FieldElement {
        FieldElement {
            value: self.reduce(v),
            prime: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }
}

impl Default for FieldPrime {
    fn default() -> Self {
        FieldPrime::mersenne31()
    }
}

impl TryFrom<u64> for FieldPrime {
    type Error = Error;
    fn try_from(q: u64) -> Result<Self> {
        FieldPrime::new(q)
    }
}

impl From<FieldPrime> for u64 {
    fn from(p: FieldPrime) -> u64 {
        p.0
    }
}

impl fmt::Display for FieldPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for all u64.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &BASES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A canonical residue in `[0, q)` tagged with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    prime: FieldPrime,
}

impl FieldElement {
    pub fn new(value: u64, prime: FieldPrime) -> Self {
        prime.element(value)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn prime(self) -> FieldPrime {
        self.prime
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: FieldElement) -> Result<FieldPrime> {
        if self.prime == other.prime {
            Ok(self.prime)
        } else {
            Err(Error::MismatchedField {
                left: self.prime.0,
                right: other.prime.0,
            })
        }
    }

    pub fn checked_add(self, rhs: FieldElement) -> Result<FieldElement> {
        let p = self.same_field(rhs)?;
        Ok(p.element(p.add(self.value, rhs.value)))
    }

    pub fn checked_sub(self, rhs: FieldElement) -> Result<FieldElement> {
        let p = self.same_field(rhs)?;
        Ok(p.element(p.sub(self.value, rhs.value)))
    }

    pub fn checked_mul(self, rhs: FieldElement) -> Result<FieldElement> {
        let p = self.same_field(rhs)?;
        Ok(p.element(p.mul(self.value, rhs.value)))
    }

    pub fn inv(self) -> Result<FieldElement> {
        Ok(self.prime.element(self.prime.inv(self.value)?))
    }

    pub fn pow(self, exp: u64) -> FieldElement {
        self.prime.element(self.prime.pow(self.value, exp))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on mixed fields, like integer overflow in debug builds.
// Use the checked_* methods where mixing is a recoverable condition.
impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.checked_add(rhs).expect("field mismatch in add")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.checked_sub(rhs).expect("field mismatch in sub")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.checked_mul(rhs).expect("field mismatch in mul")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.prime.element(self.prime.neg(self.value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    /// Inverse of the left operand; the right operand is ignored.
    Inv,
    /// Left operand raised to the canonical value of the right operand.
    Pow,
}

/// Single entry point over the five field operations.
pub fn field_arith(a: FieldElement, b: FieldElement, op: ArithOp) -> Result<FieldElement> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Inv => {
            a.same_field(b)?;
            a.inv()
        }
        ArithOp::Pow => {
            a.same_field(b)?;
            Ok(a.pow(b.value))
        }
    }
}
