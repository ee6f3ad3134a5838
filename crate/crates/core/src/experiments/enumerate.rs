//! Exact corank distributions by exhaustive enumeration.
//!
//! The rank of a matrix and the structured events below are invariant under
//! row permutations, so the walk visits each sorted row multiset
//! `r_1 <= ... <= r_n` once and weights it by its number of orderings
//! `n! / prod(mult!)`. All `2^(n^2)` matrices are accounted for, and the
//! tallies are kept per number of ones so that any rational `p` can be
//! applied afterwards in exact arithmetic.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::Probability;
use crate::rank::rank_rational_entries;

pub const MAX_ENUMERATION_N: usize = 5;

/// Matrix counts indexed by `[corank][ones]`, plus structured-event counts
/// indexed by `[k][ones]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationTable {
    pub n: usize,
    pub by_corank: Vec<Vec<u64>>,
    /// `structured[k]` counts matrices where, for some `0 <= t <= k`, there
    /// are `k - t + 1` equal rows and `t` further zero rows, or the same for
    /// columns.
    pub structured: Vec<Vec<u64>>,
}

impl EnumerationTable {
    pub fn matrix_count(&self) -> u128 {
        self.by_corank.iter().flatten().map(|&c| c as u128).sum()
    }

    /// Number of matrices with corank at least `k`.
    pub fn count_at_least(&self, k: usize) -> u64 {
        self.by_corank.iter().skip(k).flatten().sum()
    }

    pub fn structured_count(&self, k: usize) -> u64 {
        self.structured.get(k).map_or(0, |row| row.iter().sum())
    }
}

/// Exact law of the corank of an `n x n` Ber(p) matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorankDistribution {
    pub n: usize,
    pub p: Probability,
    #[serde(serialize_with = "serialize_probs")]
    pub probs: BTreeMap<usize, BigRational>,
    pub method: &'static str,
    pub matrix_count: u128,
}

fn serialize_probs<S: serde::Serializer>(probs: &BTreeMap<usize, BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(probs.len()))?;
    for (c, r) in probs {
        map.serialize_entry(&c.to_string(), &crate::prob::ratio_to_string(r))?;
    }
    map.end()
}

impl CorankDistribution {
    /// `P[corank >= k]`.
    pub fn at_least(&self, k: usize) -> BigRational {
        self.probs.range(k..).map(|(_, r)| r.clone()).fold(BigRational::zero(), |a, b| a + b)
    }
}

pub fn enumeration_table(n: usize) -> Result<EnumerationTable> {
    if n == 0 {
        return Err(Error::ZeroDimension { rows: 0, cols: 0 });
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::EnumerationRefused {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    let row_values = 1u32 << n;
    let partials: Vec<Result<EnumerationTable>> = (0..row_values)
        .into_par_iter()
        .map(|first| {
            let mut walk = Walk::new(n);
            walk.rows.push(first);
            walk.descend(first)?;
            Ok(walk.table)
        })
        .collect();
    let mut total = EnumerationTable::empty(n);
    for part in partials {
        total.absorb(&part?);
    }
    Ok(total)
}

impl EnumerationTable {
    fn empty(n: usize) -> Self {
        EnumerationTable {
            n,
            by_corank: vec![vec![0; n * n + 1]; n + 1],
            structured: vec![vec![0; n * n + 1]; n + 1],
        }
    }

    fn absorb(&mut self, other: &EnumerationTable) {
        for (dst, src) in self.by_corank.iter_mut().zip(&other.by_corank) {
            dst.iter_mut().zip(src).for_each(|(a, b)| *a += b);
        }
        for (dst, src) in self.structured.iter_mut().zip(&other.structured) {
            dst.iter_mut().zip(src).for_each(|(a, b)| *a += b);
        }
    }
}

struct Walk {
    n: usize,
    rows: Vec<u32>,
    entries: Vec<u8>,
    scratch: Vec<i64>,
    factorials: Vec<u64>,
    table: EnumerationTable,
}

impl Walk {
    fn new(n: usize) -> Self {
        Walk {
            n,
            rows: Vec::with_capacity(n),
            entries: vec![0; n * n],
            scratch: Vec::with_capacity(n * n),
            factorials: (0..=n as u64).scan(1u64, |f, i| {
                *f *= i.max(1);
                Some(*f)
            }).collect(),
            table: EnumerationTable::empty(n),
        }
    }

    fn descend(&mut self, min_row: u32) -> Result<()> {
        if self.rows.len() == self.n {
            return self.visit();
        }
        for r in min_row..1u32 << self.n {
            self.rows.push(r);
            self.descend(r)?;
            self.rows.pop();
        }
        Ok(())
    }

    fn visit(&mut self) -> Result<()> {
        let n = self.n;
        for (i, &r) in self.rows.iter().enumerate() {
            for j in 0..n {
                self.entries[i * n + j] = (r >> j & 1) as u8;
            }
        }
        let rank = rank_rational_entries(&self.entries, n, n, &mut self.scratch);
        let corank = n - rank;
        let ones: usize = self.rows.iter().map(|r| r.count_ones() as usize).sum();

        // Orderings of this multiset (rows are sorted, so runs are adjacent).
        let mut orderings = self.factorials[n];
        let mut run = 1;
        for i in 1..=n {
            if i < n && self.rows[i] == self.rows[i - 1] {
                run += 1;
            } else {
                orderings /= self.factorials[run];
                run = 1;
            }
        }
        self.table.by_corank[corank][ones] += orderings;

        let cols: Vec<u32> = (0..n)
            .map(|j| (0..n).fold(0u32, |acc, i| acc | ((self.rows[i] >> j & 1) << i)))
            .collect();
        for k in 1..n {
            if structured(&self.rows, k) || structured(&cols, k) {
                if corank < k {
                    return Err(Error::Invariant(format!(
                        "structured event for k = {k} on a matrix of corank {corank}"
                    )));
                }
                self.table.structured[k][ones] += orderings;
            }
        }
        Ok(())
    }
}

/// `k - t + 1` equal lines and `t` further zero lines for some `0 <= t <= k`.
/// Over `{0,1}`, equality up to sign is plain equality.
pub fn structured(lines: &[u32], k: usize) -> bool {
    let zeros = lines.iter().filter(|&&l| l == 0).count();
    if zeros > k {
        return true;
    }
    let mut sorted: Vec<u32> = lines.iter().copied().filter(|&l| l != 0).collect();
    sorted.sort_unstable();
    let max_run = sorted
        .chunk_by(|a, b| a == b)
        .map(|run| run.len())
        .max()
        .unwrap_or(0);
    max_run >= 1 && max_run + zeros.min(k) > k
}

/// Exact probability of a table slice under `p`: sum over `ones` of
/// `count * p^ones (1-p)^(n^2 - ones)`.
pub fn weigh(counts: &[u64], n: usize, p: Probability) -> BigRational {
    let cells = n * n;
    let a = BigInt::from(p.num());
    let b = BigInt::from(p.complement_num());
    let mut numer = BigInt::zero();
    for (ones, &count) in counts.iter().enumerate() {
        if count > 0 {
            numer += BigInt::from(count) * num::pow(a.clone(), ones) * num::pow(b.clone(), cells - ones);
        }
    }
    BigRational::new(numer, num::pow(BigInt::from(p.den()), cells))
}

pub fn distribution_from_table(table: &EnumerationTable, p: Probability) -> Result<CorankDistribution> {
    let n = table.n;
    let probs: BTreeMap<usize, BigRational> = table
        .by_corank
        .iter()
        .enumerate()
        .filter(|(_, counts)| counts.iter().any(|&c| c > 0))
        .map(|(c, counts)| (c, weigh(counts, n, p)))
        .collect();
    let total = probs.values().fold(BigRational::zero(), |a, b| a + b);
    if !total.is_one() {
        return Err(Error::Invariant(format!("corank probabilities sum to {total}")));
    }
    Ok(CorankDistribution {
        n,
        p,
        probs,
        method: "full-enumeration",
        matrix_count: table.matrix_count(),
    })
}

pub fn enumerate_corank(n: usize, p: Probability) -> Result<CorankDistribution> {
    distribution_from_table(&enumeration_table(n)?, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn two_by_two() {
        let d = enumerate_corank(2, Probability::HALF).unwrap();
        assert_eq!(d.at_least(1), q(10, 16));
        assert_eq!(d.at_least(2), q(1, 16));
        assert_eq!(d.matrix_count, 16);
    }

    #[test]
    fn three_by_three() {
        let d = enumerate_corank(3, Probability::HALF).unwrap();
        assert_eq!(d.at_least(1), q(338, 512));
        assert_eq!(d.matrix_count, 512);
    }

    #[test]
    fn one_by_one() {
        for (a, b) in [(1, 2), (1, 4), (3, 10), (2, 5)] {
            let p = Probability::new(a, b).unwrap();
            let d = enumerate_corank(1, p).unwrap();
            assert_eq!(d.at_least(1), BigRational::one() - p.ratio());
        }
    }

    #[test]
    fn refuses_large_n() {
        assert!(matches!(
            enumerate_corank(6, Probability::HALF),
            Err(Error::EnumerationRefused { n: 6, .. })
        ));
    }

    #[test]
    fn tail_is_monotone_and_sums_to_one() {
        let p = Probability::new(1, 4).unwrap();
        let d = enumerate_corank(3, p).unwrap();
        assert_eq!(d.at_least(0), BigRational::one());
        for k in 0..4 {
            assert!(d.at_least(k + 1) <= d.at_least(k));
        }
        assert_eq!(d.at_least(3), num::pow(p.complement_ratio(), 9));
    }

    #[test]
    fn structured_predicate() {
        assert!(structured(&[0, 0, 5], 1));
        assert!(structured(&[3, 3, 5], 1));
        assert!(!structured(&[1, 2, 4], 1));
        // k = 2: t = 1 needs two equal rows and one zero row.
        assert!(structured(&[3, 3, 0], 2));
        assert!(!structured(&[3, 3, 5], 2));
        assert!(structured(&[3, 3, 3], 2));
        assert!(structured(&[0, 0, 1], 2));
    }

    #[test]
    fn structured_events_have_large_corank() {
        let t = enumeration_table(3).unwrap();
        for k in 1..3 {
            assert!(t.structured_count(k) <= t.count_at_least(k));
            assert!(t.structured_count(k) > 0);
        }
    }
}
