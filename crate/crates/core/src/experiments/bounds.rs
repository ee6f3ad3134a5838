//! Closed-form rates and lower-bound events for `P[corank M_n >= k]`.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::enumerate::{distribution_from_table, enumeration_table, weigh, MAX_ENUMERATION_N};
use crate::prob::{ratio_to_f64, ratio_to_string, Probability};
use crate::restricted_invertibility::binomial;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub k: usize,
    pub p: Probability,
    pub epsilon: f64,
    /// `(1 - p + eps)^(kn)`.
    pub theorem_rate: f64,
    /// `(1 - p)^(kn)`: `k` given rows all zero.
    pub zero_rows_lower: f64,
    /// `(P[xi = 0] + eps)^(kn) + (p^(k+1) + (1-p)^(k+1) + eps)^n`.
    pub conjecture_rhs: f64,
    /// Largest over `t` of (number of distinct structured events) times
    /// (probability of one of them).
    pub structured_lower: f64,
    pub structured_t: usize,
    /// Exact probability of the union of all structured events (rows or
    /// columns), when `n` is small enough to enumerate.
    pub structured_union_exact: Option<String>,
    pub structured_union: Option<f64>,
    /// Exact `P[corank >= k]` alongside, when enumerated.
    pub corank_exact: Option<String>,
    /// `P[corank >= k] / structured_union`.
    pub structured_ratio: Option<f64>,
}

/// Probability that `k - t + 1` given rows are equal and `t` other given
/// rows are zero.
pub fn structured_event_probability(n: usize, k: usize, t: usize, p: Probability) -> f64 {
    let (pf, qf) = (p.as_f64(), p.complement_f64());
    let equal = (k - t + 1) as i32;
    qf.powi((t * n) as i32) * (pf.powi(equal) + qf.powi(equal)).powi(n as i32)
}

/// Number of distinct events of shape `t`. At `t = k` the single "equal"
/// row is unconstrained, so only the zero rows are chosen.
pub fn structured_event_count(n: usize, k: usize, t: usize) -> u128 {
    if t == k {
        binomial(n, k)
    } else {
        binomial(n, t) * binomial(n - t.min(n), k - t + 1)
    }
}

pub fn bound_row(n: usize, k: usize, p: Probability, epsilon: f64) -> Result<BoundRow> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} must be nonnegative")));
    }
    if k == 0 || n == 0 {
        return Err(Error::InvalidArgument("n and k must be at least 1".into()));
    }
    let (pf, qf) = (p.as_f64(), p.complement_f64());
    let kn = (k * n) as i32;
    let theorem_rate = (qf + epsilon).powi(kn);
    let zero_rows_lower = qf.powi(kn);
    let equal_base = pf.powi(k as i32 + 1) + qf.powi(k as i32 + 1);
    let conjecture_rhs = (qf + epsilon).powi(kn) + (equal_base + epsilon).powi(n as i32);
    let (structured_t, structured_lower) = (0..=k)
        .map(|t| (t, structured_event_count(n, k, t) as f64 * structured_event_probability(n, k, t, p)))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if zero_rows_lower > theorem_rate {
        return Err(Error::Invariant("zero-row bound exceeds the theorem rate".into()));
    }
    Ok(BoundRow {
        n,
        k,
        p,
        epsilon,
        theorem_rate,
        zero_rows_lower,
        conjecture_rhs,
        structured_lower,
        structured_t,
        structured_union_exact: None,
        structured_union: None,
        corank_exact: None,
        structured_ratio: None,
    })
}

/// One row per `n`. With `exact_union`, rows with `n <= 5` and `k < n` also
/// carry the exact union probability of the structured events and the exact
/// corank tail, both from full enumeration.
pub fn bound_table(n_range: RangeInclusive<usize>, p: Probability, k: usize, epsilon: f64, exact_union: bool) -> Result<Vec<BoundRow>> {
    n_range
        .map(|n| {
            let mut row = bound_row(n, k, p, epsilon)?;
            if exact_union && n <= MAX_ENUMERATION_N && k < n {
                let table = enumeration_table(n)?;
                let union = weigh(&table.structured[k], n, p);
                let tail = distribution_from_table(&table, p)?.at_least(k);
                if union > tail {
                    return Err(Error::Invariant("structured union exceeds the corank tail".into()));
                }
                let union_f = ratio_to_f64(&union);
                row.structured_ratio = Some(ratio_to_f64(&tail) / union_f);
                row.structured_union = Some(union_f);
                row.structured_union_exact = Some(ratio_to_string(&union));
                row.corank_exact = Some(ratio_to_string(&tail));
            }
            Ok(row)
        })
        .collect()
}
