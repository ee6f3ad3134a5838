//! Exact rank of 0/1 matrices.
//!
//! `rank_rational` runs fraction-free (Bareiss) elimination. Every
//! intermediate entry is a minor of the input, so all divisions are exact.
//! The kernel first runs in checked `i64` and restarts with `BigInt` on the
//! first overflow, so no result can be corrupted by wraparound.
//!
//! `rank_mod_prime` is the fast filter: the rank over GF(q) never exceeds the
//! rational rank.

use num::{BigInt, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::BernoulliMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    RationalElimination,
    Modular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankResult {
    pub rank: usize,
    /// `cols - rank`: the dimension of the right kernel.
    pub corank: usize,
    pub method: RankMethod,
    pub prime: Option<u64>,
}

/// Default screening prime, `2^31 - 1`.
pub const SCREEN_PRIME: u64 = 2_147_483_647;

pub fn rank_rational(m: &BernoulliMatrix) -> RankResult {
    let mut scratch = Vec::new();
    let rank = rank_rational_entries(m.entries(), m.rows(), m.cols(), &mut scratch);
    RankResult {
        rank,
        corank: m.cols() - rank,
        method: RankMethod::RationalElimination,
        prime: None,
    }
}

pub fn rank_mod_prime(m: &BernoulliMatrix, q: u64) -> Result<RankResult> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let mut scratch = Vec::new();
    let rank = rank_mod_prime_entries(m.entries(), m.rows(), m.cols(), q, &mut scratch);
    Ok(RankResult {
        rank,
        corank: m.cols() - rank,
        method: RankMethod::Modular,
        prime: Some(q),
    })
}

/// Rational rank of a row-major 0/1 (or small integer) matrix, reusing
/// `scratch` between calls.
pub fn rank_rational_entries(entries: &[u8], rows: usize, cols: usize, scratch: &mut Vec<i64>) -> usize {
    debug_assert_eq!(entries.len(), rows * cols);
    scratch.clear();
    scratch.extend(entries.iter().map(|&e| e as i64));
    match bareiss_i64(scratch, rows, cols) {
        Some(rank) => rank,
        None => {
            let mut big: Vec<BigInt> = entries.iter().map(|&e| BigInt::from(e)).collect();
            bareiss_big(&mut big, rows, cols)
        }
    }
}

/// Returns `None` if any intermediate value overflows `i64`.
fn bareiss_i64(a: &mut [i64], rows: usize, cols: usize) -> Option<usize> {
    let mut prev: i64 = 1;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pivot_row) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if pivot_row != r {
            for j in c..cols {
                a.swap(pivot_row * cols + j, r * cols + j);
            }
        }
        let pivot = a[r * cols + c];
        for i in r + 1..rows {
            let lead = a[i * cols + c];
            for j in c + 1..cols {
                let num = pivot
                    .checked_mul(a[i * cols + j])?
                    .checked_sub(lead.checked_mul(a[r * cols + j])?)?;
                a[i * cols + j] = num / prev;
            }
            a[i * cols + c] = 0;
        }
        prev = pivot;
        r += 1;
    }
    Some(r)
}

fn bareiss_big(a: &mut [BigInt], rows: usize, cols: usize) -> usize {
    let mut prev = BigInt::from(1);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pivot_row) = (r..rows).find(|&i| !a[i * cols + c].is_zero()) else {
            continue;
        };
        if pivot_row != r {
            for j in c..cols {
                a.swap(pivot_row * cols + j, r * cols + j);
            }
        }
        let pivot = a[r * cols + c].clone();
        for i in r + 1..rows {
            let lead = a[i * cols + c].clone();
            for j in c + 1..cols {
                let num = &pivot * &a[i * cols + j] - &lead * &a[r * cols + j];
                a[i * cols + j] = num / &prev;
            }
            a[i * cols + c] = BigInt::zero();
        }
        prev = pivot;
        r += 1;
    }
    r
}

/// Rank over GF(q). `q` must already be known prime.
pub fn rank_mod_prime_entries(entries: &[u8], rows: usize, cols: usize, q: u64, scratch: &mut Vec<u64>) -> usize {
    debug_assert_eq!(entries.len(), rows * cols);
    scratch.clear();
    scratch.extend(entries.iter().map(|&e| e as u64 % q));
    let a = scratch.as_mut_slice();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pivot_row) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if pivot_row != r {
            for j in c..cols {
                a.swap(pivot_row * cols + j, r * cols + j);
            }
        }
        let inv = pow_mod(a[r * cols + c], q - 2, q);
        for i in r + 1..rows {
            let factor = mul_mod(a[i * cols + c], inv, q);
            if factor == 0 {
                continue;
            }
            for j in c..cols {
                let sub = mul_mod(factor, a[r * cols + j], q);
                a[i * cols + j] = (a[i * cols + j] + q - sub) % q;
            }
        }
        r += 1;
    }
    r
}

fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
