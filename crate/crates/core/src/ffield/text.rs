//! Plain-text matrix format: a `rows cols q` header line followed by one
//! line per row of space-separated base-10 residues. Output is canonical
//! (single spaces, no leading zeros, trailing newline).

use std::fmt::Write as _;
use std::path::Path;

use super::{FieldMatrix, FieldPrime};
use crate::error::{Error, Result};

pub fn format_matrix(m: &FieldMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", m.rows(), m.cols(), m.prime()).unwrap();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if c > 0 {
                out.push(' ');
            }
            write!(out, "{}", m.get(r, c)).unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_u64(tok: &str, what: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| Error::Parse(format!("invalid {what} `{tok}`")))
}

/// Parses the text format. Values must already be residues in `[0, q)`.
pub fn parse_matrix(text: &str) -> Result<FieldMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!("header must be `rows cols q`, got `{header}`")));
    }
    let rows = parse_u64(fields[0], "row count")? as usize;
    let cols = parse_u64(fields[1], "column count")? as usize;
    let prime = FieldPrime::new(parse_u64(fields[2], "modulus")?)?;
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {rows} rows, found {r}")))?;
        let row: Vec<u64> = line
            .split_whitespace()
            .map(|t| parse_u64(t, "entry"))
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "row {r} has {} entries, expected {cols}",
                row.len()
            )));
        }
        if let Some(&v) = row.iter().find(|&&v| v >= prime.modulus()) {
            return Err(Error::Parse(format!("entry {v} is not a residue mod {prime}")));
        }
        data.extend(row);
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("trailing data after {rows} rows")));
    }
    FieldMatrix::new(rows, cols, prime, data)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<FieldMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &FieldMatrix) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_output() {
        let p = FieldPrime::new(101).unwrap();
        let m = FieldMatrix::from_rows(p, &[vec![0, 7, 100], vec![5, 0, 1]]).unwrap();
        assert_eq!(format_matrix(&m), "2 3 101\n0 7 100\n5 0 1\n");
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let text = "2 2 7\n1 2\n3 4\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(format_matrix(&m), text);
        // lenient on whitespace, output re-canonicalised
        assert_eq!(format_matrix(&parse_matrix("2 2 7\n 1  2 \n3 4").unwrap()), text);

        for bad in [
            "",
            "2 2\n1 2\n3 4\n",
            "2 2 8\n1 2\n3 4\n",
            "2 2 7\n1 2\n",
            "2 2 7\n1 2\n3 7\n",
            "2 2 7\n1 2 3\n3 4\n",
            "1 1 7\n1\n2\n",
            "1 1 7\nx\n",
        ] {
            assert!(parse_matrix(bad).is_err(), "accepted {bad:?}");
        }
    }
}
