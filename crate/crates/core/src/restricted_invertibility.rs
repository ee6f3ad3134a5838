//! Column subset selection with a controlled inverse.
//!
//! For an `n x m` matrix `U` of rank `n` there is a set `S` of `n` columns
//! with `||U_S^{-1}||_HS^2 <= (m - n + 1) Tr[(U U^T)^{-1}]`. This module finds
//! such a set by brute force (the minimiser over all `n`-subsets) or by a
//! backward trace-greedy heuristic, and reports the bound next to it.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::smallest_singular_value;

/// Subsets whose smallest singular value is at or below this are skipped.
pub const INVERTIBILITY_TOL: f64 = 1e-8;
pub const EXHAUSTIVE_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    Exhaustive,
    Greedy,
}

impl std::str::FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SelectionMode::Exhaustive),
            "greedy" => Ok(SelectionMode::Greedy),
            other => Err(Error::InvalidArgument(format!("unknown selection mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSelection {
    /// Selected column indices, ascending, zero-based.
    pub subset: Vec<usize>,
    pub hs_inv_sq: f64,
    pub trace_inv: f64,
    /// `(m - n + 1) Tr[(U U^T)^{-1}]`.
    pub bound: f64,
    pub mode: SelectionMode,
    pub qualifies: bool,
}

pub fn binomial(m: usize, n: usize) -> u128 {
    if n > m {
        return 0;
    }
    let n = n.min(m - n);
    (0..n).fold(1u128, |acc, i| acc * (m - i) as u128 / (i + 1) as u128)
}

/// `Tr[(A A^T)^{-1}]`, or `None` if `A A^T` is singular.
pub fn trace_of_gram_inverse(a: &DMatrix<f64>) -> Option<f64> {
    let gram = a * a.transpose();
    let inv = gram.cholesky()?.inverse();
    Some(inv.trace())
}

/// `||A^{-1}||_HS^2` for square `A` with `sigma_min(A) > INVERTIBILITY_TOL`.
fn hs_inverse_sq(a: &DMatrix<f64>) -> Option<f64> {
    if smallest_singular_value(a).ok()? <= INVERTIBILITY_TOL {
        return None;
    }
    let inv = a.clone().try_inverse()?;
    Some(inv.iter().map(|v| v * v).sum())
}

pub fn select_columns(u: &DMatrix<f64>, mode: SelectionMode) -> Result<ColumnSelection> {
    let (n, m) = u.shape();
    if n == 0 || n > m {
        return Err(Error::DimensionMismatch(format!("need 1 <= rows <= cols, got {n}x{m}")));
    }
    let sigma = smallest_singular_value(u)?;
    if sigma <= INVERTIBILITY_TOL {
        return Err(Error::RankDeficient { sigma });
    }
    let trace_inv = trace_of_gram_inverse(u).ok_or(Error::RankDeficient { sigma })?;
    let bound = (m - n + 1) as f64 * trace_inv;
    let (subset, hs_inv_sq) = match mode {
        SelectionMode::Exhaustive => exhaustive(u)?,
        SelectionMode::Greedy => greedy(u)?,
    };
    Ok(ColumnSelection {
        qualifies: hs_inv_sq <= bound * (1.0 + 1e-8),
        subset,
        hs_inv_sq,
        trace_inv,
        bound,
        mode,
    })
}

/// Minimiser of `||U_S^{-1}||_HS^2`; the first subset in lexicographic order
/// wins ties.
fn exhaustive(u: &DMatrix<f64>) -> Result<(Vec<usize>, f64)> {
    let (n, m) = u.shape();
    let needed = binomial(m, n);
    if needed > EXHAUSTIVE_BUDGET {
        return Err(Error::BudgetExceeded {
            needed,
            budget: EXHAUSTIVE_BUDGET,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in (0..m).combinations(n) {
        let Some(value) = hs_inverse_sq(&u.select_columns(&subset)) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((subset, value));
        }
    }
    best.ok_or_else(|| Error::Invariant("no invertible column subset of a full-rank matrix".into()))
}

/// Drop one column at a time, always the one whose removal least increases
/// `Tr[(U_R U_R^T)^{-1}]` (smallest index on ties), until `n` remain.
fn greedy(u: &DMatrix<f64>) -> Result<(Vec<usize>, f64)> {
    let (n, m) = u.shape();
    let mut remaining: Vec<usize> = (0..m).collect();
    while remaining.len() > n {
        let mut choice: Option<(usize, f64)> = None;
        for pos in 0..remaining.len() {
            let trial: Vec<usize> = remaining
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != pos)
                .map(|(_, &c)| c)
                .collect();
            let sub = u.select_columns(&trial);
            if smallest_singular_value(&sub)? <= INVERTIBILITY_TOL {
                continue;
            }
            let Some(value) = trace_of_gram_inverse(&sub) else {
                continue;
            };
            if choice.is_none_or(|(_, b)| value < b) {
                choice = Some((pos, value));
            }
        }
        let (pos, _) = choice.ok_or_else(|| Error::Invariant("greedy removal lost full rank".into()))?;
        remaining.remove(pos);
    }
    let value = hs_inverse_sq(&u.select_columns(&remaining))
        .ok_or_else(|| Error::Invariant("greedy selection is singular".into()))?;
    Ok((remaining, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_block() {
        let u = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        for mode in [SelectionMode::Exhaustive, SelectionMode::Greedy] {
            let s = select_columns(&u, mode).unwrap();
            assert_eq!(s.subset, vec![0, 1]);
            assert!((s.hs_inv_sq - 2.0).abs() < 1e-12);
            assert!((s.bound - 4.0).abs() < 1e-12);
            assert!(s.qualifies);
        }
    }

    #[test]
    fn single_row() {
        let u = DMatrix::from_row_slice(1, 2, &[0.6, 0.8]);
        let s = select_columns(&u, SelectionMode::Exhaustive).unwrap();
        assert_eq!(s.subset, vec![1]);
        assert!((s.hs_inv_sq - 1.5625).abs() < 1e-12);
        assert!((s.bound - 2.0).abs() < 1e-12);
        assert!(s.qualifies);
    }

    #[test]
    fn rank_deficient_rejected() {
        let u = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(
            select_columns(&u, SelectionMode::Exhaustive),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn budget_refused() {
        let u = DMatrix::from_fn(6, 40, |i, j| if (i + j) % 6 == 0 { 1.0 } else { 0.1 * j as f64 });
        assert!(matches!(
            select_columns(&u, SelectionMode::Exhaustive),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn skips_singular_subsets() {
        // Columns 0 and 1 are parallel, so {0, 1} must be skipped.
        let u = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 1.0]);
        let s = select_columns(&u, SelectionMode::Exhaustive).unwrap();
        assert_ne!(s.subset, vec![0, 1]);
        assert!(s.qualifies);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 4), 210);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(40, 6), 3_838_380);
    }
}
