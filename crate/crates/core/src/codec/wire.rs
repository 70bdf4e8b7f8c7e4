//! Framed binary encoding of shares and answers.
//!
//! A frame carries one matrix:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "ASMM"
//!      4     2  version (u16 LE)
//!      6     4  server_index (u32 LE, 1-based)
//!     10     4  rows (u32 LE)
//!     14     4  cols (u32 LE)
//!     18     8  q (u64 LE)
//!     26  8*rc  entries, row-major, u64 LE
//! ```
//!
//! A share is two consecutive frames (`A~` then `B~`) with the same server
//! index; an answer is a single frame holding `Z`.

use std::io::{Read, Write};

use super::{Answer, SchemeParams, SharePair};
use crate::error::{Error, Result};
use crate::ffield::{FieldMatrix, FieldPrime};

pub const FRAME_MAGIC: [u8; 4] = *b"ASMM";
pub const FRAME_VERSION: u16 = 1;
pub const FRAME_HEADER_LEN: usize = 26;

pub fn write_frame<W: Write>(w: &mut W, server_index: usize, m: &FieldMatrix) -> Result<()> {
    let mut header = Vec::with_capacity(FRAME_HEADER_LEN);
    header.extend_from_slice(&FRAME_MAGIC);
    header.extend_from_slice(&FRAME_VERSION.to_le_bytes());
    for v in [server_index, m.rows(), m.cols()] {
        let v = u32::try_from(v).map_err(|_| Error::Frame(format!("{v} does not fit in u32")))?;
        header.extend_from_slice(&v.to_le_bytes());
    }
    header.extend_from_slice(&m.prime().modulus().to_le_bytes());
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(8 * m.data().len());
    for &v in m.data() {
        body.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<(usize, FieldMatrix)> {
    let mut header = [0u8; FRAME_HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Frame(format!("short header: {e}")))?;
    if header[..4] != FRAME_MAGIC {
        return Err(Error::Frame("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != FRAME_VERSION {
        return Err(Error::Frame(format!("unsupported version {version}")));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
    let (server_index, rows, cols) = (u32_at(6), u32_at(10), u32_at(14));
    let q = u64::from_le_bytes(header[18..26].try_into().unwrap());
    let prime = FieldPrime::new(q).map_err(|_| Error::Frame(format!("modulus {q} is not prime")))?;
    let len = rows
        .checked_mul(cols)
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Frame(format!("bad shape {rows}x{cols}")))?;
    let mut body = vec![0u8; 8 * len];
    r.read_exact(&mut body)
        .map_err(|e| Error::Frame(format!("short payload: {e}")))?;
    let data: Vec<u64> = body
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(v) = data.iter().find(|&&v| v >= q) {
        return Err(Error::Frame(format!("entry {v} is not a residue mod {q}")));
    }
    Ok((server_index, FieldMatrix::new(rows, cols, prime, data)?))
}

fn point_for(params: &SchemeParams, server_index: usize, prime: FieldPrime) -> Result<u64> {
    if prime != params.prime() {
        return Err(Error::MismatchedField {
            left: prime.modulus(),
            right: params.prime().modulus(),
        });
    }
    params
        .point(server_index)
        .ok_or_else(|| Error::Frame(format!("server index {server_index} outside [1, {}]", params.n())))
}

impl SharePair {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        write_frame(w, self.server_index, &self.a_tilde)?;
        write_frame(w, self.server_index, &self.b_tilde)
    }

    /// Reads a share; the evaluation point is looked up from `params`.
    pub fn read_from<R: Read>(r: &mut R, params: &SchemeParams) -> Result<SharePair> {
        let (idx_a, a_tilde) = read_frame(r)?;
        let (idx_b, b_tilde) = read_frame(r)?;
        if idx_a != idx_b {
            return Err(Error::Frame(format!(
                "share frames disagree on server ({idx_a} vs {idx_b})"
            )));
        }
        let point = point_for(params, idx_a, a_tilde.prime())?;
        Ok(SharePair {
            server_index: idx_a,
            point,
            a_tilde,
            b_tilde,
        })
    }
}

impl Answer {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        write_frame(w, self.server_index, &self.z)
    }

    pub fn read_from<R: Read>(r: &mut R, params: &SchemeParams) -> Result<Answer> {
        let (server_index, z) = read_frame(r)?;
        let point = point_for(params, server_index, z.prime())?;
        Ok(Answer { server_index, point, z })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_fixed() {
        let p = FieldPrime::new(7).unwrap();
        let m = FieldMatrix::from_rows(p, &[vec![1, 2]]).unwrap();
        let mut buf = Vec::new();
        write_frame(&mut buf, 3, &m).unwrap();
        let expected: Vec<u8> = [
            &b"ASMM"[..],
            &[1, 0],
            &[3, 0, 0, 0],
            &[1, 0, 0, 0],
            &[2, 0, 0, 0],
            &[7, 0, 0, 0, 0, 0, 0, 0],
            &[1, 0, 0, 0, 0, 0, 0, 0],
            &[2, 0, 0, 0, 0, 0, 0, 0],
        ]
        .concat();
        assert_eq!(buf, expected);
    }

    #[test]
    fn rejects_corrupt_frames() {
        let p = FieldPrime::new(7).unwrap();
        let m = FieldMatrix::from_rows(p, &[vec![1, 2]]).unwrap();
        let mut good = Vec::new();
        write_frame(&mut good, 1, &m).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        let mut bad_version = good.clone();
        bad_version[4] = 9;
        let mut bad_prime = good.clone();
        bad_prime[18] = 8;
        let mut bad_entry = good.clone();
        bad_entry[26] = 7;
        let truncated = good[..good.len() - 1].to_vec();
        for buf in [bad_magic, bad_version, bad_prime, bad_entry, truncated] {
            assert!(matches!(read_frame(&mut buf.as_slice()), Err(Error::Frame(_))));
        }
    }

    #[test]
    fn share_and_answer_need_matching_params() {
        let p = FieldPrime::new(11).unwrap();
        let params = SchemeParams::new(4, 1, p).unwrap();
        let share = SharePair {
            server_index: 4,
            point: 4,
            a_tilde: FieldMatrix::from_rows(p, &[vec![1, 2]]).unwrap(),
            b_tilde: FieldMatrix::from_rows(p, &[vec![3], vec![4]]).unwrap(),
        };
        let mut buf = Vec::new();
        share.write_to(&mut buf).unwrap();
        assert_eq!(SharePair::read_from(&mut buf.as_slice(), &params).unwrap(), share);

        let small = SchemeParams::new(3, 1, p).unwrap();
        assert!(SharePair::read_from(&mut buf.as_slice(), &small).is_err());
        let other_field = SchemeParams::new(4, 1, FieldPrime::new(13).unwrap()).unwrap();
        assert!(SharePair::read_from(&mut buf.as_slice(), &other_field).is_err());
    }

    proptest! {
        #[test]
        fn frame_roundtrip(rows in 1usize..6, cols in 1usize..6, idx in 1usize..1000, seed: u64) {
            use rand::SeedableRng;
            let p = FieldPrime::mersenne31();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = FieldMatrix::random(rows, cols, p, &mut rng);
            let mut buf = Vec::new();
            write_frame(&mut buf, idx, &m).unwrap();
            prop_assert_eq!(buf.len(), FRAME_HEADER_LEN + 8 * rows * cols);
            let (i, back) = read_frame(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(i, idx);
            prop_assert_eq!(back, m);
        }
    }
}
