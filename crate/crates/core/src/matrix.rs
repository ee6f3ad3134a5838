//! Dense 0/1 matrices and their seeded sampling.
//!
//! The generator is `ChaCha8Rng` from `rand_chacha`, seeded with
//! `seed_from_u64(seed)`, and a work item selects its own stream with
//! `set_stream(index)`. Each entry consumes one `random_range(0..den)` draw
//! and is 1 when that draw is below `num`, for `p = num/den`. Entries are
//! drawn in row-major order. A single sampled matrix uses stream 0.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::Probability;

/// Tag written into every record that depends on the sampled bit stream.
pub const GENERATOR_VERSION: &str = "chacha8-stream/rand0.9-range/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Sampled,
    Explicit,
}

/// An `rows x cols` matrix with entries in `{0, 1}`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BernoulliMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
    p: Option<Probability>,
    seed: Option<u64>,
    provenance: Provenance,
}

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fill `out` with i.i.d. Ber(p) bits.
pub fn fill_bernoulli<R: Rng + ?Sized>(rng: &mut R, p: Probability, out: &mut [u8]) {
    let (num, den) = (p.num(), p.den());
    for e in out.iter_mut() {
        *e = u8::from(rng.random_range(0..den) < num);
    }
}

pub fn sample_matrix(rows: usize, cols: usize, p: Probability, seed: u64) -> Result<BernoulliMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::ZeroDimension { rows, cols });
    }
    let mut rng = stream_rng(seed, 0);
    let mut entries = vec![0u8; rows * cols];
    fill_bernoulli(&mut rng, p, &mut entries);
    Ok(BernoulliMatrix {
        rows,
        cols,
        entries,
        p: Some(p),
        seed: Some(seed),
        provenance: Provenance::Sampled,
    })
}

impl BernoulliMatrix {
    /// Build an explicit matrix from row-major 0/1 entries.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ZeroDimension { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|&&e| e > 1) {
            return Err(Error::Parse(format!("entry {bad} is not 0 or 1")));
        }
        Ok(BernoulliMatrix {
            rows,
            cols,
            entries,
            p: None,
            seed: None,
            provenance: Provenance::Explicit,
        })
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let entries = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_entries(rows.len(), cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_entries(rows, cols, vec![0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Self::from_entries(n, n, entries)
    }

    /// Parse dense bit-field rows such as `["011", "101"]`.
    pub fn from_bit_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let parsed: Result<Vec<Vec<u8>>> = rows.iter().map(|r| parse_bit_row(r.as_ref())).collect();
        Self::from_rows(&parsed?)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn p(&self) -> Option<Probability> {
        self.p
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn ones(&self) -> usize {
        self.entries.iter().filter(|&&e| e == 1).count()
    }

    pub fn transpose(&self) -> BernoulliMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j));
            }
        }
        BernoulliMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
            p: self.p,
            seed: self.seed,
            provenance: self.provenance,
        }
    }

    /// Reorder rows so that new row `i` is old row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<BernoulliMatrix> {
        check_permutation(perm, self.rows)?;
        let mut out = self.clone();
        for (i, &src) in perm.iter().enumerate() {
            out.entries[i * self.cols..(i + 1) * self.cols].copy_from_slice(self.row(src));
        }
        Ok(out)
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Result<BernoulliMatrix> {
        check_permutation(perm, self.cols)?;
        let mut out = self.clone();
        for i in 0..self.rows {
            for (j, &src) in perm.iter().enumerate() {
                out.entries[i * self.cols + j] = self.get(i, src);
            }
        }
        Ok(out)
    }

    /// Text form: a `rows cols` header followed by one line of 0/1
    /// characters per row.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        text.parse()
    }
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return Err(Error::DimensionMismatch(format!("permutation of length {} for {len}", perm.len())));
    }
    for &i in perm {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
    }
    Ok(())
}

fn parse_bit_row(row: &str) -> Result<Vec<u8>> {
    row.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Parse(format!("unexpected character {other:?} in bit row"))),
        })
        .collect()
}

impl fmt::Display for BernoulliMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for &e in self.row(i) {
                f.write_str(if e == 1 { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Parse a `rows cols` header line.
pub(crate) fn parse_header(line: Option<&str>) -> Result<(usize, usize)> {
    let line = line.ok_or_else(|| Error::Parse("missing `rows cols` header".into()))?;
    let mut it = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("header is missing {what}")))?
            .parse()
            .map_err(|_| Error::Parse(format!("header {what} is not a count")))
    };
    let rows = next("rows")?;
    let cols = next("cols")?;
    Ok((rows, cols))
}

impl FromStr for BernoulliMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let (rows, cols) = parse_header(lines.next())?;
        let body: Vec<Vec<u8>> = lines.map(parse_bit_row).collect::<Result<_>>()?;
        if body.len() != rows {
            return Err(Error::Parse(format!("expected {rows} rows, found {}", body.len())));
        }
        if let Some(bad) = body.iter().find(|r| r.len() != cols) {
            return Err(Error::Parse(format!("expected {cols} columns, found a row of {}", bad.len())));
        }
        Self::from_rows(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic() {
        let p = Probability::new(1, 4).unwrap();
        let a = sample_matrix(5, 7, p, 42).unwrap();
        let b = sample_matrix(5, 7, p, 42).unwrap();
        let c = sample_matrix(5, 7, p, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.entries(), c.entries());
        assert_eq!(a.provenance(), Provenance::Sampled);
    }

    #[test]
    fn entry_mean_half() {
        let hits: usize = (0..100_000u64)
            .map(|s| sample_matrix(2, 2, Probability::HALF, s).unwrap().get(0, 0) as usize)
            .sum();
        let mean = hits as f64 / 1e5;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn density_quarter() {
        let p = Probability::new(1, 4).unwrap();
        let ones: usize = (0..100_000u64)
            .map(|s| sample_matrix(3, 3, p, s).unwrap().ones())
            .sum();
        let density = ones as f64 / 9e5;
        assert!((density - 0.25).abs() < 0.01, "{density}");
    }

    #[test]
    fn rejects_zero_dimensions() {
        assert!(matches!(
            sample_matrix(0, 3, Probability::HALF, 1),
            Err(Error::ZeroDimension { .. })
        ));
        assert!(BernoulliMatrix::zeros(2, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = BernoulliMatrix::from_bit_strings(&["110", "011"]).unwrap();
        let text = m.to_text();
        assert_eq!(text, "2 3\n110\n011\n");
        assert_eq!(BernoulliMatrix::from_text(&text).unwrap(), m);
        assert!(BernoulliMatrix::from_text("2 3\n110\n").is_err());
        assert!(BernoulliMatrix::from_text("1 2\n12\n").is_err());
    }

    #[test]
    fn transpose_and_permute() {
        let m = BernoulliMatrix::from_bit_strings(&["10", "11", "01"]).unwrap();
        let t = m.transpose();
        assert_eq!((t.rows(), t.cols()), (2, 3));
        assert_eq!(t.row(0), &[1, 1, 0]);
        let pr = m.permute_rows(&[2, 0, 1]).unwrap();
        assert_eq!(pr.row(0), &[0, 1]);
        assert!(m.permute_rows(&[0, 0, 1]).is_err());
        let pc = m.permute_cols(&[1, 0]).unwrap();
        assert_eq!(pc.row(0), &[0, 1]);
    }
}
