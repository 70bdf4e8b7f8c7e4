use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{desired_exponent, Partition, SchemeParams};
use crate::error::{Error, Result};
use crate::ffield::{FieldMatrix, FieldPrime, Interpolator};

/// What to do when `r_A` does not divide the rows of `A` or `r_B` the columns of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Padding {
    #[default]
    Reject,
    /// Zero-extend to the next multiple; [`decode`] truncates back.
    Zero,
}

/// The `ell` uniform key blocks for each side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub a: Vec<FieldMatrix>,
    pub b: Vec<FieldMatrix>,
}

impl KeyMaterial {
    /// `ell` key blocks per side, entries uniform over GF(q), drawn A-side first.
    pub fn sample<R: Rng + ?Sized>(
        prime: FieldPrime,
        ell: usize,
        a_block: (usize, usize),
        b_block: (usize, usize),
        rng: &mut R,
    ) -> Self {
        let a = (0..ell)
            .map(|_| FieldMatrix::random(a_block.0, a_block.1, prime, rng))
            .collect();
        let b = (0..ell)
            .map(|_| FieldMatrix::random(b_block.0, b_block.1, prime, rng))
            .collect();
        KeyMaterial { a, b }
    }

    pub fn zeros(prime: FieldPrime, ell: usize, a_block: (usize, usize), b_block: (usize, usize)) -> Self {
        KeyMaterial {
            a: vec![FieldMatrix::zeros(a_block.0, a_block.1, prime); ell],
            b: vec![FieldMatrix::zeros(b_block.0, b_block.1, prime); ell],
        }
    }
}

/// Encoded inputs sent to one server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharePair {
    /// 1-based.
    pub server_index: usize,
    pub point: u64,
    pub a_tilde: FieldMatrix,
    pub b_tilde: FieldMatrix,
}

/// A server's reply, `Z = A~ B~`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub server_index: usize,
    pub point: u64,
    pub z: FieldMatrix,
}

/// Splits `A` into `r_A` row blocks and `B` into `r_B` column blocks.
pub fn split_inputs(
    a: &FieldMatrix,
    b: &FieldMatrix,
    part: Partition,
    padding: Padding,
) -> Result<(Vec<FieldMatrix>, Vec<FieldMatrix>)> {
    if a.prime() != b.prime() {
        return Err(Error::MismatchedField {
            left: a.prime().modulus(),
            right: b.prime().modulus(),
        });
    }
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (r_a, r_b) = (part.r_a as usize, part.r_b as usize);
    let (m, p) = (a.rows(), b.cols());
    let (a, b) = match padding {
        Padding::Reject => {
            if m % r_a != 0 || p % r_b != 0 {
                return Err(Error::DivisibilityViolation(format!(
                    "r_A={r_a} must divide m={m} and r_B={r_b} must divide p={p}"
                )));
            }
            (a.clone(), b.clone())
        }
        Padding::Zero => (
            a.resized(m.div_ceil(r_a) * r_a, a.cols()),
            b.resized(b.rows(), p.div_ceil(r_b) * r_b),
        ),
    };
    let rows = a.rows() / r_a;
    let cols = b.cols() / r_b;
    let a_blocks = (0..r_a).map(|j| a.row_block(j * rows, rows)).collect();
    let b_blocks = (0..r_b).map(|j| b.col_block(j * cols, cols)).collect();
    Ok((a_blocks, b_blocks))
}

/// Evaluates both encoding polynomials at every point. Points are taken as
/// given so that degenerate layouts can be studied by the security oracle.
pub(crate) fn encode_blocks(
    a_blocks: &[FieldMatrix],
    b_blocks: &[FieldMatrix],
    keys: &KeyMaterial,
    prime: FieldPrime,
    points: &[u64],
) -> Result<Vec<SharePair>> {
    let r_a = a_blocks.len() as u64;
    let r_b = b_blocks.len() as u64;
    let ell = keys.a.len() as u64;
    if keys.b.len() as u64 != ell || ell == 0 {
        return Err(Error::InvalidParams("need ell >= 1 key blocks on each side".into()));
    }
    let stride = r_a + ell;
    let tail = (r_b - 1) * stride;
    let (a_shape, b_shape) = (
        (a_blocks[0].rows(), a_blocks[0].cols()),
        (b_blocks[0].rows(), b_blocks[0].cols()),
    );
    for k in keys.a.iter() {
        if (k.rows(), k.cols()) != a_shape {
            return Err(Error::DimensionMismatch("A-side key block shape".into()));
        }
    }
    for k in keys.b.iter() {
        if (k.rows(), k.cols()) != b_shape {
            return Err(Error::DimensionMismatch("B-side key block shape".into()));
        }
    }

    points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut a_tilde = FieldMatrix::zeros(a_shape.0, a_shape.1, prime);
            for (j, block) in a_blocks.iter().enumerate() {
                a_tilde.add_scaled_assign(block, prime.pow(x, j as u64))?;
            }
            for (k, key) in keys.a.iter().enumerate() {
                a_tilde.add_scaled_assign(key, prime.pow(x, k as u64 + r_a))?;
            }
            let mut b_tilde = FieldMatrix::zeros(b_shape.0, b_shape.1, prime);
            for (j, block) in b_blocks.iter().enumerate() {
                b_tilde.add_scaled_assign(block, prime.pow(x, j as u64 * stride))?;
            }
            for (k, key) in keys.b.iter().enumerate() {
                b_tilde.add_scaled_assign(key, prime.pow(x, k as u64 + r_a + tail))?;
            }
            Ok(SharePair {
                server_index: i + 1,
                point: x,
                a_tilde,
                b_tilde,
            })
        })
        .collect()
}

/// Encodes with caller-supplied keys (all-zero keys reduce to plain polynomial codes).
pub fn encode_with_keys(
    a: &FieldMatrix,
    b: &FieldMatrix,
    part: Partition,
    params: &SchemeParams,
    padding: Padding,
    keys: &KeyMaterial,
) -> Result<Vec<SharePair>> {
    params.check_feasible(part)?;
    check_field(a.prime(), params)?;
    let (a_blocks, b_blocks) = split_inputs(a, b, part, padding)?;
    if keys.a.len() as u64 != params.ell() {
        return Err(Error::InvalidParams(format!(
            "{} key blocks supplied for ell={}",
            keys.a.len(),
            params.ell()
        )));
    }
    encode_blocks(&a_blocks, &b_blocks, keys, params.prime(), params.points())
}

fn encode_seeded(
    a: &FieldMatrix,
    b: &FieldMatrix,
    part: Partition,
    params: &SchemeParams,
    padding: Padding,
    seed: u64,
) -> Result<Vec<SharePair>> {
    params.check_feasible(part)?;
    check_field(a.prime(), params)?;
    let (a_blocks, b_blocks) = split_inputs(a, b, part, padding)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keys = KeyMaterial::sample(
        params.prime(),
        params.ell() as usize,
        (a_blocks[0].rows(), a_blocks[0].cols()),
        (b_blocks[0].rows(), b_blocks[0].cols()),
        &mut rng,
    );
    encode_blocks(&a_blocks, &b_blocks, &keys, params.prime(), params.points())
}

/// Shares for all `N` servers; keys come from a ChaCha20 stream seeded by `seed`.
pub fn encode(
    a: &FieldMatrix,
    b: &FieldMatrix,
    part: Partition,
    params: &SchemeParams,
    seed: u64,
) -> Result<Vec<SharePair>> {
    encode_seeded(a, b, part, params, Padding::Reject, seed)
}

/// Like [`encode`], zero-padding inputs whose dimensions the partition does not divide.
pub fn encode_padded(
    a: &FieldMatrix,
    b: &FieldMatrix,
    part: Partition,
    params: &SchemeParams,
    seed: u64,
) -> Result<Vec<SharePair>> {
    encode_seeded(a, b, part, params, Padding::Zero, seed)
}

fn check_field(prime: FieldPrime, params: &SchemeParams) -> Result<()> {
    if prime != params.prime() {
        return Err(Error::MismatchedField {
            left: prime.modulus(),
            right: params.prime().modulus(),
        });
    }
    Ok(())
}

/// What an honest server does with its share.
pub fn server_compute(share: &SharePair) -> Result<Answer> {
    Ok(Answer {
        server_index: share.server_index,
        point: share.point,
        z: share.a_tilde.mat_mul(&share.b_tilde)?,
    })
}

/// Recovers the `m x p` product from any `Q` answers with distinct points.
///
/// Only the first `Q` answers are used. The answer blocks fix the (possibly
/// padded) product shape; `m` and `p` truncate it back.
pub fn decode(answers: &[Answer], part: Partition, params: &SchemeParams, m: usize, p: usize) -> Result<FieldMatrix> {
    let q = part.q(params.ell()) as usize;
    let mut seen = HashSet::with_capacity(answers.len());
    for a in answers {
        if !seen.insert(a.point) {
            return Err(Error::DuplicatePoint(a.point));
        }
    }
    if answers.len() < q {
        return Err(Error::TooFewAnswers {
            needed: q,
            got: answers.len(),
        });
    }
    let used = &answers[..q];
    let (rows, cols) = (used[0].z.rows(), used[0].z.cols());
    for a in used {
        check_field(a.z.prime(), params)?;
        if (a.z.rows(), a.z.cols()) != (rows, cols) {
            return Err(Error::DimensionMismatch(format!(
                "answer from server {} is {}x{}, expected {rows}x{cols}",
                a.server_index,
                a.z.rows(),
                a.z.cols()
            )));
        }
    }
    let (r_a, r_b) = (part.r_a as usize, part.r_b as usize);
    if m > rows * r_a || p > cols * r_b || m == 0 || p == 0 {
        return Err(Error::DimensionMismatch(format!(
            "cannot recover a {m}x{p} product from {rows}x{cols} answer blocks"
        )));
    }

    let points: Vec<u64> = used.iter().map(|a| a.point).collect();
    let interp = Interpolator::new(params.prime(), &points)?;
    let samples: Vec<&FieldMatrix> = used.iter().map(|a| &a.z).collect();
    let mut product = FieldMatrix::zeros(rows * r_a, cols * r_b, params.prime());
    for j_b in 0..r_b {
        for j_a in 0..r_a {
            let e = desired_exponent(part.r_a, params.ell(), j_a as u64, j_b as u64) as usize;
            let block = interp.matrix_coefficient(e, &samples)?;
            for r in 0..rows {
                for c in 0..cols {
                    product.set(j_a * rows + r, j_b * cols + c, block.get(r, c));
                }
            }
        }
    }
    Ok(if (m, p) == (product.rows(), product.cols()) {
        product
    } else {
        product.resized(m, p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::build_exponent_map;
    use crate::ffield::evaluate;
    use itertools::Itertools;

    fn fp(q: u64) -> FieldPrime {
        FieldPrime::new(q).unwrap()
    }

    fn random_pair(m: usize, n: usize, p: usize, prime: FieldPrime, seed: u64) -> (FieldMatrix, FieldMatrix) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (
            FieldMatrix::random(m, n, prime, &mut rng),
            FieldMatrix::random(n, p, prime, &mut rng),
        )
    }

    fn answers(shares: &[SharePair]) -> Vec<Answer> {
        shares.iter().map(|s| server_compute(s).unwrap()).collect()
    }

    #[test]
    fn zero_keys_pass_inputs_through() {
        let prime = fp(101);
        let params = SchemeParams::new(3, 1, prime).unwrap();
        let part = Partition::new(1, 1).unwrap();
        let a = FieldMatrix::from_rows(prime, &[vec![17]]).unwrap();
        let b = FieldMatrix::from_rows(prime, &[vec![42]]).unwrap();
        let keys = KeyMaterial::zeros(prime, 1, (1, 1), (1, 1));
        let shares = encode_with_keys(&a, &b, part, &params, Padding::Reject, &keys).unwrap();
        assert_eq!(shares.len(), 3);
        for s in &shares {
            assert_eq!(s.a_tilde, a);
            assert_eq!(s.b_tilde, b);
        }
    }

    #[test]
    fn two_by_two_roundtrip_all_five() {
        let prime = FieldPrime::mersenne31();
        let params = SchemeParams::new(5, 1, prime).unwrap();
        let part = Partition::new(2, 1).unwrap();
        let (a, b) = random_pair(2, 2, 2, prime, 1);
        let ans = answers(&encode(&a, &b, part, &params, 99).unwrap());
        assert_eq!(decode(&ans, part, &params, 2, 2).unwrap(), a.mat_mul(&b).unwrap());
    }

    #[test]
    fn same_seed_same_shares() {
        let prime = FieldPrime::mersenne31();
        let params = SchemeParams::new(8, 1, prime).unwrap();
        let part = Partition::new(2, 2).unwrap();
        let (a, b) = random_pair(4, 3, 2, prime, 5);
        let s1 = encode(&a, &b, part, &params, 7).unwrap();
        let s2 = encode(&a, &b, part, &params, 7).unwrap();
        let s3 = encode(&a, &b, part, &params, 8).unwrap();
        assert_eq!(s1, s2);
        assert_ne!(s1, s3);
    }

    #[test]
    fn share_matches_polynomial_evaluation() {
        // each share entry is the evaluation of a polynomial whose coefficients
        // are the matching entries of the data and key blocks at their exponents
        let prime = fp(1009);
        let params = SchemeParams::new(11, 2, prime).unwrap();
        let part = Partition::new(2, 2).unwrap();
        let (a, b) = random_pair(2, 1, 2, prime, 3);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let keys = KeyMaterial::sample(prime, 2, (1, 1), (1, 1), &mut rng);
        let shares = encode_with_keys(&a, &b, part, &params, Padding::Reject, &keys).unwrap();
        // A~(x) = A0 + A1 x + KA0 x^2 + KA1 x^3
        let a_poly = [a.get(0, 0), a.get(1, 0), keys.a[0].get(0, 0), keys.a[1].get(0, 0)];
        // B~(x) = B0 + B1 x^4 + KB0 x^6 + KB1 x^7   (stride r_A+ell=4, tail=4)
        let mut b_poly = [0u64; 8];
        b_poly[0] = b.get(0, 0);
        b_poly[4] = b.get(0, 1);
        b_poly[6] = keys.b[0].get(0, 0);
        b_poly[7] = keys.b[1].get(0, 0);
        for s in &shares {
            assert_eq!(s.a_tilde.get(0, 0), evaluate(prime, &a_poly, s.point));
            assert_eq!(s.b_tilde.get(0, 0), evaluate(prime, &b_poly, s.point));
        }
    }

    #[test]
    fn answer_polynomial_follows_exponent_map() {
        // interpolating a scalar answer recovers exactly the exponent-map layout
        let prime = fp(10007);
        let (r_a, r_b, ell) = (2u64, 3u64, 2u64);
        let part = Partition::new(r_a, r_b).unwrap();
        let q = part.q(ell) as usize;
        let params = SchemeParams::new(q as u64, ell, prime).unwrap();
        let (a, b) = random_pair(r_a as usize, 1, r_b as usize, prime, 21);
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let keys = KeyMaterial::sample(prime, ell as usize, (1, 1), (1, 1), &mut rng);
        let ans = answers(&encode_with_keys(&a, &b, part, &params, Padding::Reject, &keys).unwrap());
        let xs: Vec<u64> = ans.iter().map(|x| x.point).collect();
        let ys: Vec<u64> = ans.iter().map(|x| x.z.get(0, 0)).collect();
        let coeffs = Interpolator::new(prime, &xs).unwrap().coefficients(&ys);

        let map = build_exponent_map(r_a, r_b, ell);
        let mut expect = vec![0u64; q];
        for (&e, &(j_a, j_b)) in &map.desired {
            expect[e as usize] = prime.mul(a.get(j_a as usize, 0), b.get(0, j_b as usize));
        }
        for (&e, terms) in &map.interference {
            for t in terms {
                let v = match *t {
                    crate::codec::Term::KeyAData { k, j_b } => {
                        prime.mul(keys.a[k as usize].get(0, 0), b.get(0, j_b as usize))
                    }
                    crate::codec::Term::DataKeyB { j_a, k } => {
                        prime.mul(a.get(j_a as usize, 0), keys.b[k as usize].get(0, 0))
                    }
                    crate::codec::Term::KeyKey { k_a, k_b } => {
                        prime.mul(keys.a[k_a as usize].get(0, 0), keys.b[k_b as usize].get(0, 0))
                    }
                };
                expect[e as usize] = prime.add(expect[e as usize], v);
            }
        }
        assert_eq!(coeffs, expect);
    }

    #[test]
    fn drop_any_one_of_six() {
        let prime = FieldPrime::mersenne31();
        let params = SchemeParams::new(6, 1, prime).unwrap();
        let part = Partition::new(2, 1).unwrap();
        let (a, b) = random_pair(4, 3, 5, prime, 2);
        let want = a.mat_mul(&b).unwrap();
        let all = answers(&encode(&a, &b, part, &params, 3).unwrap());
        for dropped in 0..6 {
            let rest: Vec<Answer> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != dropped)
                .map(|(_, a)| a.clone())
                .collect();
            assert_eq!(decode(&rest, part, &params, 4, 5).unwrap(), want, "dropped {dropped}");
        }
    }

    #[test]
    fn every_q_subset_and_order_decodes() {
        let prime = FieldPrime::mersenne31();
        let params = SchemeParams::new(9, 2, prime).unwrap();
        let part = Partition::new(1, 2).unwrap();
        assert_eq!(part.q(2), 8);
        let (a, b) = random_pair(3, 2, 4, prime, 6);
        let want = a.mat_mul(&b).unwrap();
        let all = answers(&encode(&a, &b, part, &params, 1).unwrap());
        for subset in all.iter().cloned().combinations(8) {
            let mut rev = subset.clone();
            rev.reverse();
            assert_eq!(decode(&subset, part, &params, 3, 4).unwrap(), want);
            assert_eq!(decode(&rev, part, &params, 3, 4).unwrap(), want);
        }
    }

    #[test]
    fn threshold_and_duplicate_errors() {
        let prime = FieldPrime::mersenne31();
        let params = SchemeParams::new(6, 1, prime).unwrap();
        let part = Partition::new(2, 1).unwrap();
        let (a, b) = random_pair(2, 2, 2, prime, 2);
        let all = answers(&encode(&a, &b, part, &params, 3).unwrap());
        assert_eq!(
            decode(&all[..4], part, &params, 2, 2),
            Err(Error::TooFewAnswers { needed: 5, got: 4 })
        );
        let mut dup = all[..5].to_vec();
        dup.push(all[0].clone());
        assert_eq!(decode(&dup, part, &params, 2, 2), Err(Error::DuplicatePoint(1)));
    }

    #[test]
    fn encode_preconditions() {
        let prime = FieldPrime::mersenne31();
        let (a, b) = random_pair(3, 2, 2, prime, 2);
        let params = SchemeParams::new(5, 1, prime).unwrap();
        assert!(matches!(
            encode(&a, &b, Partition::new(2, 1).unwrap(), &params, 0),
            Err(Error::DivisibilityViolation(_))
        ));
        // Q = 5 = N is still feasible
        assert!(encode(&a, &b, Partition::new(1, 2).unwrap(), &params, 0).is_ok());
        assert_eq!(
            encode(&a, &b, Partition::new(2, 2).unwrap(), &params, 0),
            Err(Error::InfeasiblePartition { q: 8, n: 5 })
        );
        let wrong_inner = FieldMatrix::zeros(3, 2, prime);
        assert!(matches!(
            encode(&a, &wrong_inner, Partition::new(1, 1).unwrap(), &params, 0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn padded_roundtrip_truncates() {
        let prime = FieldPrime::mersenne31();
        let params = SchemeParams::new(12, 1, prime).unwrap();
        let part = Partition::new(3, 2).unwrap();
        assert_eq!(part.q(1), 11);
        let (a, b) = random_pair(4, 3, 5, prime, 8);
        let shares = encode_padded(&a, &b, part, &params, 4).unwrap();
        assert_eq!((shares[0].a_tilde.rows(), shares[0].b_tilde.cols()), (2, 3));
        let out = decode(&answers(&shares), part, &params, 4, 5).unwrap();
        assert_eq!(out, a.mat_mul(&b).unwrap());
    }

    #[test]
    fn server_compute_examples() {
        let prime = fp(13);
        let z = server_compute(&SharePair {
            server_index: 1,
            point: 1,
            a_tilde: FieldMatrix::zeros(2, 3, prime),
            b_tilde: FieldMatrix::zeros(3, 2, prime),
        })
        .unwrap();
        assert!(z.z.is_zero());
        let one = server_compute(&SharePair {
            server_index: 2,
            point: 2,
            a_tilde: FieldMatrix::from_rows(prime, &[vec![5]]).unwrap(),
            b_tilde: FieldMatrix::from_rows(prime, &[vec![6]]).unwrap(),
        })
        .unwrap();
        assert_eq!(one.z.get(0, 0), 4);
        let bad = SharePair {
            server_index: 1,
            point: 1,
            a_tilde: FieldMatrix::zeros(2, 3, prime),
            b_tilde: FieldMatrix::zeros(2, 3, prime),
        };
        assert!(matches!(server_compute(&bad), Err(Error::DimensionMismatch(_))));
    }
}
