// Independent oracles shared by the integration tests. None of these call
// into the library's numerical code.
#![allow(dead_code)]

use itertools::Itertools;
use nalgebra::DMatrix;
use num::{BigInt, BigRational};
use rand::Rng;
use rand_distr::StandardNormal;

/// Cofactor expansion along the first row.
pub fn det_cofactor(a: &[Vec<i64>]) -> i64 {
    match a.len() {
        0 => 1,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        n => (0..n)
            .filter(|&j| a[0][j] != 0)
            .map(|j| {
                let minor: Vec<Vec<i64>> = a[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * a[0][j] * det_cofactor(&minor)
            })
            .sum(),
    }
}

/// Order of the largest nonvanishing minor.
pub fn rank_by_minors(a: &[Vec<i64>]) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    for r in (1..=rows.min(cols)).rev() {
        for rs in (0..rows).combinations(r) {
            for cs in (0..cols).combinations(r) {
                let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| a[i][j]).collect()).collect();
                if det_cofactor(&sub) != 0 {
                    return r;
                }
            }
        }
    }
    0
}

/// The n x n 0/1 matrix whose entry (i, j) is bit `i n + j` of `code`.
pub fn matrix_from_code(code: u64, n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| (0..n).map(|j| ((code >> (i * n + j)) & 1) as i64).collect()).collect()
}

/// Every outcome of `sum b_i x_i`, unmerged, with its mass numerator over
/// `den^n`.
pub fn outcomes(x: &[f64], num: u128, den: u128) -> Vec<(f64, u128)> {
    let n = x.len();
    (0u64..1 << n)
        .map(|s| {
            let mut v = 0.0;
            let mut mass = 1u128;
            for (i, &xi) in x.iter().enumerate() {
                if s >> i & 1 == 1 {
                    v += xi;
                    mass *= num;
                } else {
                    mass *= den - num;
                }
            }
            (v, mass)
        })
        .collect()
}

/// `L(sum b_i x_i, r)` by trying every outcome as the left end of a window
/// of length `2r`.
pub fn naive_levy(x: &[f64], num: u128, den: u128, r: f64) -> BigRational {
    let out = outcomes(x, num, den);
    let best = out
        .iter()
        .map(|&(lo, _)| out.iter().filter(|&&(v, _)| v >= lo && v - lo <= 2.0 * r).map(|&(_, m)| m).sum::<u128>())
        .max()
        .unwrap_or(0);
    BigRational::new(BigInt::from(best), BigInt::from(den).pow(x.len() as u32))
}

/// `sup { t in (0,1) : L(S, t) > L t }` over the grid `step, 2 step, ...`.
///
/// `L(S, t)` is the running maximum, over pairs of outcomes sorted by half
/// their distance, of the mass between them.
pub fn grid_threshold(x: &[f64], p: f64, big_l: f64, step: f64) -> f64 {
    let n = x.len();
    let mut out: Vec<(f64, f64)> = (0u64..1 << n)
        .map(|s| {
            let ones = s.count_ones() as i32;
            let v = x.iter().enumerate().filter(|&(i, _)| s >> i & 1 == 1).map(|(_, &xi)| xi).sum();
            (v, p.powi(ones) * (1.0 - p).powi(n as i32 - ones))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prefix = vec![0.0];
    for &(_, m) in &out {
        prefix.push(prefix.last().unwrap() + m);
    }
    let mut pairs = Vec::with_capacity(out.len() * (out.len() + 1) / 2);
    for i in 0..out.len() {
        for j in i..out.len() {
            pairs.push(((out[j].0 - out[i].0) / 2.0, prefix[j + 1] - prefix[i]));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let steps = (1.0 / step).round() as usize;
    let (mut ptr, mut level, mut best) = (0, 0.0f64, 0.0);
    for g in 1..steps {
        let t = g as f64 * step;
        while ptr < pairs.len() && pairs[ptr].0 <= t {
            level = level.max(pairs[ptr].1);
            ptr += 1;
        }
        if level > big_l * t {
            best = t;
        }
    }
    best
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Rows orthonormalised by two passes of modified Gram-Schmidt.
pub fn orthonormal_rows<R: Rng>(rng: &mut R, k: usize, n: usize) -> DMatrix<f64> {
    let mut rows: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    for _ in 0..2 {
        for i in 0..k {
            for j in 0..i {
                let (head, tail) = rows.split_at_mut(i);
                let dot: f64 = head[j].iter().zip(&tail[0]).map(|(a, b)| a * b).sum();
                for (t, h) in tail[0].iter_mut().zip(&head[j]) {
                    *t -= dot * h;
                }
            }
            let norm = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
            rows[i].iter_mut().for_each(|v| *v /= norm);
        }
    }
    DMatrix::from_fn(k, n, |i, j| rows[i][j])
}

pub fn inverse_hs_sq(a: &DMatrix<f64>) -> Option<f64> {
    a.clone().try_inverse().map(|inv| inv.iter().map(|v| v * v).sum())
}
