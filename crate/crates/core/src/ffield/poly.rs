//! Univariate polynomials over GF(q) in monomial coefficient order
//! (`coeffs[e]` multiplies `x^e`).

use std::collections::HashSet;

use super::{FieldElement, FieldMatrix, FieldPrime};
use crate::error::{Error, Result};

/// Horner evaluation.
pub fn evaluate(prime: FieldPrime, coeffs: &[u64], x: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| prime.add(prime.mul(acc, x), c))
}

fn check_distinct(xs: &[u64]) -> Result<()> {
    let mut seen = HashSet::with_capacity(xs.len());
    for &x in xs {
        if !seen.insert(x) {
            return Err(Error::DuplicateEvaluationPoint(x));
        }
    }
    Ok(())
}

/// Newton divided differences, expanded into monomial form. O(t^2).
pub fn interpolate_raw(prime: FieldPrime, xs: &[u64], ys: &[u64]) -> Result<Vec<u64>> {
    assert_eq!(xs.len(), ys.len());
    check_distinct(xs)?;
    let t = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..t {
        for i in (level..t).rev() {
            let num = prime.sub(dd[i], dd[i - 1]);
            let den = prime.sub(xs[i], xs[i - level]);
            dd[i] = prime.mul(num, prime.inv(den)?);
        }
    }
    let mut coeffs = vec![0u64; t];
    // coeffs holds the running polynomial in its low `deg + 1` slots
    for i in (0..t).rev() {
        // poly <- poly * (x - xs[i]) + dd[i]
        let xi = xs[i];
        let mut carry = 0u64;
        for c in coeffs.iter_mut() {
            let cur = *c;
            *c = prime.sub(carry, prime.mul(cur, xi));
            carry = cur;
        }
        coeffs[0] = prime.add(coeffs[0], dd[i]);
    }
    Ok(coeffs)
}

/// Recovers the coefficients `c_0..c_{degree_bound}` of the unique polynomial
/// through the first `degree_bound + 1` samples.
pub fn interpolate(samples: &[(FieldElement, FieldElement)], degree_bound: usize) -> Result<Vec<FieldElement>> {
    let needed = degree_bound + 1;
    if samples.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: samples.len(),
        });
    }
    let prime = samples[0].0.prime();
    let used = &samples[..needed];
    for (x, y) in used {
        for p in [x.prime(), y.prime()] {
            if p != prime {
                return Err(Error::MismatchedField {
                    left: prime.modulus(),
                    right: p.modulus(),
                });
            }
        }
    }
    let xs: Vec<u64> = used.iter().map(|(x, _)| x.value()).collect();
    let ys: Vec<u64> = used.iter().map(|(_, y)| y.value()).collect();
    Ok(interpolate_raw(prime, &xs, &ys)?
        .into_iter()
        .map(|c| prime.element(c))
        .collect())
}

/// Lagrange basis for a fixed point set, precomputed once so that many
/// value vectors (or matrix-valued samples) over the same points can be
/// interpolated with one weighted sum per coefficient.
#[derive(Debug, Clone)]
pub struct Interpolator {
    prime: FieldPrime,
    points: Vec<u64>,
    /// `weights[e * t + i]`: coefficient of `x^e` in the i-th Lagrange basis polynomial.
    weights: Vec<u64>,
}

impl Interpolator {
    pub fn new(prime: FieldPrime, points: &[u64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        check_distinct(points)?;
        let t = points.len();
        // master(x) = prod (x - x_i), degree t
        let mut master = vec![0u64; t + 1];
        master[0] = 1;
        for (deg, &xi) in points.iter().enumerate() {
            for e in (0..=deg + 1).rev() {
                let shifted = if e > 0 { master[e - 1] } else { 0 };
                master[e] = prime.sub(shifted, prime.mul(master[e], xi));
            }
        }
        let mut weights = vec![0u64; t * t];
        let mut basis = vec![0u64; t];
        for (i, &xi) in points.iter().enumerate() {
            // synthetic division master(x) / (x - xi)
            let mut carry = master[t];
            for e in (0..t).rev() {
                basis[e] = carry;
                carry = prime.add(master[e], prime.mul(carry, xi));
            }
            let scale = prime.inv(evaluate(prime, &basis, xi))?;
            for e in 0..t {
                weights[e * t + i] = prime.mul(basis[e], scale);
            }
        }
        Ok(Interpolator {
            prime,
            points: points.to_vec(),
            weights,
        })
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coefficients(&self, values: &[u64]) -> Vec<u64> {
        (0..self.len()).map(|e| self.coefficient(e, values)).collect()
    }

    pub fn coefficient(&self, exponent: usize, values: &[u64]) -> u64 {
        let t = self.len();
        assert_eq!(values.len(), t);
        let q = self.prime.modulus() as u128;
        let row = &self.weights[exponent * t..(exponent + 1) * t];
        let acc = row
            .iter()
            .zip(values)
            .fold(0u128, |acc, (&w, &v)| (acc + w as u128 * v as u128) % q);
        acc as u64
    }

    /// Matrix-valued coefficient of `x^exponent` given one matrix sample per point.
    pub fn matrix_coefficient(&self, exponent: usize, samples: &[&FieldMatrix]) -> Result<FieldMatrix> {
        let t = self.len();
        if samples.len() != t {
            return Err(Error::InsufficientSamples {
                needed: t,
                got: samples.len(),
            });
        }
        let mut out = FieldMatrix::zeros(samples[0].rows(), samples[0].cols(), self.prime);
        for (i, s) in samples.iter().enumerate() {
            out.add_scaled_assign(s, self.weights[exponent * t + i])?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn samples(q: u64, pts: &[(u64, u64)]) -> Vec<(FieldElement, FieldElement)> {
        let p = FieldPrime::new(q).unwrap();
        pts.iter().map(|&(x, y)| (p.element(x), p.element(y))).collect()
    }

    fn values(v: Vec<FieldElement>) -> Vec<u64> {
        v.into_iter().map(FieldElement::value).collect()
    }

    #[test]
    fn constant_and_linear_fits() {
        assert_eq!(
            values(interpolate(&samples(7, &[(1, 5), (2, 5)]), 1).unwrap()),
            vec![5, 0]
        );
        assert_eq!(
            values(interpolate(&samples(7, &[(1, 3), (2, 5)]), 1).unwrap()),
            vec![1, 2]
        );
    }

    #[test]
    fn uses_only_first_degree_bound_plus_one() {
        // third sample is inconsistent with the line through the first two
        let s = samples(7, &[(1, 3), (2, 5), (3, 0)]);
        assert_eq!(values(interpolate(&s, 1).unwrap()), vec![1, 2]);
    }

    #[test]
    fn errors() {
        assert_eq!(
            interpolate(&samples(7, &[(1, 3)]), 1),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        );
        assert_eq!(
            interpolate(&samples(7, &[(2, 3), (2, 4)]), 1),
            Err(Error::DuplicateEvaluationPoint(2))
        );
        assert!(Interpolator::new(FieldPrime::new(7).unwrap(), &[1, 1]).is_err());
    }

    #[test]
    fn degree_nine_roundtrip_over_mersenne31() {
        let p = FieldPrime::mersenne31();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let coeffs: Vec<u64> = (0..10).map(|_| rng.gen_range(0..p.modulus())).collect();
        let s: Vec<_> = (1..=10u64)
            .map(|x| (p.element(x), p.element(evaluate(p, &coeffs, x))))
            .collect();
        assert_eq!(values(interpolate(&s, 9).unwrap()), coeffs);
    }

    proptest! {
        #[test]
        fn newton_and_lagrange_agree_and_recover(
            coeffs in prop::collection::vec(0u64..crate::ffield::MERSENNE_31, 1..24),
            seed: u64,
        ) {
            let p = FieldPrime::mersenne31();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut xs = HashSet::new();
            while xs.len() < coeffs.len() {
                xs.insert(rng.gen_range(0..p.modulus()));
            }
            let xs: Vec<u64> = xs.into_iter().collect();
            let ys: Vec<u64> = xs.iter().map(|&x| evaluate(p, &coeffs, x)).collect();
            let newton = interpolate_raw(p, &xs, &ys).unwrap();
            let lagrange = Interpolator::new(p, &xs).unwrap().coefficients(&ys);
            prop_assert_eq!(&newton, &coeffs);
            prop_assert_eq!(&lagrange, &coeffs);
        }
    }
}
