//! Certified small-ball radius for `Mx` with `M` a `k x n` matrix with
//! orthonormal rows and `x` Bernoulli.
//!
//! The pipeline takes from each row the `floor(C^2 25^k / p)` largest entries
//! in absolute value (capped at `n`) and splits on the tail mass outside their
//! union `T`:
//!
//! * Case I: some row keeps at least `4^-k` of its mass outside `T`, and the
//!   LKR inequality controls that row on its own.
//! * Case II: otherwise `U = M_T` is close to an isometry,
//!   `Tr[(U U^T)^{-1}] < 2k`, and column selection yields `k` columns `S`
//!   with `sigma_k(M_S) >= sqrt(p) / (2 C k 5^k)`, which separates the
//!   `2^k` images of `{0,1}^k`.
//!
//! Either way the radius is `theta = sqrt(p) / (5 C k 5^k)`.

use nalgebra::DMatrix;
use num::{BigRational, One};
use serde::Serialize;

use crate::anticoncentration::{check_orthonormal_rows, vector_levy_bracket_capped, DEFAULT_C_LKR, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::geometry::{smallest_singular_value, top_indices};
use crate::prob::{ratio_serde, Probability};
use crate::restricted_invertibility::{binomial, select_columns, trace_of_gram_inverse, SelectionMode, EXHAUSTIVE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaConfig {
    pub c_lkr: f64,
    /// Replaces `min(n, floor(C^2 25^k / p))` as the per-row set size.
    pub top_set_size: Option<usize>,
    pub enumeration_cap: usize,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig {
            c_lkr: DEFAULT_C_LKR,
            top_set_size: None,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThetaCase {
    I,
    II,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseTwo {
    pub subset: Vec<usize>,
    pub sigma_k: f64,
    pub sigma_bound: f64,
    pub trace_bound: f64,
    pub hs_inv_sq: f64,
    pub hs_bound: f64,
    pub selection_mode: SelectionMode,
    /// Smallest `||M_S (x - y)||` over distinct `x, y in {0,1}^k`, when `k <= 8`.
    pub min_binary_separation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaCertificate {
    pub k: usize,
    pub n: usize,
    pub p: Probability,
    pub c_lkr: f64,
    pub top_set_size: usize,
    pub top_sets: Vec<Vec<usize>>,
    pub union: Vec<usize>,
    /// `sum_{j not in T} M_ij^2` per row.
    pub tail_masses: Vec<f64>,
    pub case: ThetaCase,
    pub theta: f64,
    pub case_one_row: Option<usize>,
    /// Case I radius `5^-k sqrt(p) / (3 C)`.
    pub case_one_radius: Option<f64>,
    pub case_two: Option<CaseTwo>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaVerification {
    #[serde(with = "ratio_serde")]
    pub lower: BigRational,
    #[serde(with = "ratio_serde")]
    pub upper: BigRational,
    #[serde(with = "ratio_serde")]
    pub target: BigRational,
    pub ok: bool,
}

/// `floor(C^2 25^k / p)` capped at `n`.
pub fn top_set_size(k: usize, n: usize, p: Probability, c: f64) -> usize {
    let raw = c * c * 25f64.powi(k as i32) * p.den() as f64 / p.num() as f64;
    if !(raw < n as f64) {
        n
    } else {
        (raw * (1.0 + 1e-12)).floor() as usize
    }
}

pub fn theta_value(k: usize, p: Probability, c: f64) -> f64 {
    p.as_f64().sqrt() / (5.0 * c * k as f64 * 5f64.powi(k as i32))
}

/// Per-row top-`size` index sets and their union, both ascending.
pub fn build_top_index_sets(m: &DMatrix<f64>, size: usize) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    check_orthonormal_rows(m)?;
    let n = m.ncols();
    let mut in_union = vec![false; n];
    let sets: Vec<Vec<usize>> = m
        .row_iter()
        .map(|row| {
            let values: Vec<f64> = row.iter().copied().collect();
            let mut set = top_indices(&values, size.min(n));
            set.sort_unstable();
            for &j in &set {
                in_union[j] = true;
            }
            set
        })
        .collect();
    let union = (0..n).filter(|&j| in_union[j]).collect();
    Ok((sets, union))
}

pub fn compute_theta(m: &DMatrix<f64>, p: Probability, config: &ThetaConfig) -> Result<ThetaCertificate> {
    let (k, n) = m.shape();
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch(format!("need 1 <= k <= n, got {k}x{n}")));
    }
    let c = config.c_lkr;
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("C = {c} must be positive")));
    }
    let size = config.top_set_size.unwrap_or_else(|| top_set_size(k, n, p, c));
    let (top_sets, union) = build_top_index_sets(m, size)?;

    let mut outside = vec![true; n];
    for &j in &union {
        outside[j] = false;
    }
    let tail_masses: Vec<f64> = m
        .row_iter()
        .map(|row| row.iter().zip(&outside).filter(|(_, &o)| o).map(|(v, _)| v * v).sum())
        .collect();

    let five_k = 5f64.powi(k as i32);
    let sqrt_p = p.as_f64().sqrt();
    if config.top_set_size.is_none() {
        let tail_cap = sqrt_p / (five_k * c) * (1.0 + 1e-12);
        if let Some(v) = (0..n).filter(|&j| outside[j]).flat_map(|j| m.column(j).iter().copied().collect::<Vec<_>>()).find(|v| v.abs() > tail_cap) {
            return Err(Error::Invariant(format!("tail entry {v} exceeds 5^-k sqrt(p)/C = {tail_cap}")));
        }
    }

    let split = 4f64.powi(-(k as i32));
    let theta = theta_value(k, p, c);
    let case_one_row = tail_masses.iter().position(|&t| t >= split);
    if case_one_row.is_some() {
        return Ok(ThetaCertificate {
            k,
            n,
            p,
            c_lkr: c,
            top_set_size: size,
            top_sets,
            union,
            tail_masses,
            case: ThetaCase::I,
            theta,
            case_one_row,
            case_one_radius: Some(sqrt_p / (five_k * 3.0 * c)),
            case_two: None,
        });
    }

    let u = m.select_columns(&union);
    let trace_bound = trace_of_gram_inverse(&u).ok_or_else(|| Error::Invariant("M_T is singular in case II".into()))?;
    if !(trace_bound < 2.0 * k as f64) {
        return Err(Error::Invariant(format!("Tr[(UU^T)^-1] = {trace_bound} is not below 2k")));
    }
    let mode = if binomial(union.len(), k) <= EXHAUSTIVE_BUDGET {
        SelectionMode::Exhaustive
    } else {
        SelectionMode::Greedy
    };
    let selection = select_columns(&u, mode)?;
    let subset: Vec<usize> = selection.subset.iter().map(|&i| union[i]).collect();
    let hs_bound = 2.0 * c * c * (k * k) as f64 * 25f64.powi(k as i32) / p.as_f64();
    if !(selection.hs_inv_sq <= hs_bound * (1.0 + 1e-8)) {
        return Err(Error::Invariant(format!(
            "selected columns give ||M_S^-1||_HS^2 = {} above {hs_bound}",
            selection.hs_inv_sq
        )));
    }
    let m_s = m.select_columns(&subset);
    let sigma_k = smallest_singular_value(&m_s)?;
    let sigma_bound = sqrt_p / (2.0 * c * k as f64 * five_k);
    if !(sigma_k >= sigma_bound * (1.0 - 1e-8)) {
        return Err(Error::Invariant(format!("sigma_k(M_S) = {sigma_k} below {sigma_bound}")));
    }
    Ok(ThetaCertificate {
        k,
        n,
        p,
        c_lkr: c,
        top_set_size: size,
        top_sets,
        union,
        tail_masses,
        case: ThetaCase::II,
        theta,
        case_one_row: None,
        case_one_radius: None,
        case_two: Some(CaseTwo {
            subset,
            sigma_k,
            sigma_bound,
            trace_bound,
            hs_inv_sq: selection.hs_inv_sq,
            hs_bound,
            selection_mode: mode,
            min_binary_separation: (k <= 8).then(|| min_binary_separation(&m_s)),
        }),
    })
}

/// Smallest distance between images of distinct points of `{0,1}^k` under a
/// `k x k` matrix.
pub fn min_binary_separation(m_s: &DMatrix<f64>) -> f64 {
    let k = m_s.ncols();
    let image = |bits: usize| -> Vec<f64> {
        (0..m_s.nrows())
            .map(|i| (0..k).filter(|&j| bits >> j & 1 == 1).map(|j| m_s[(i, j)]).sum())
            .collect()
    };
    let images: Vec<Vec<f64>> = (0..1usize << k).map(image).collect();
    let mut best = f64::INFINITY;
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            let d: f64 = images[a].iter().zip(&images[b]).map(|(u, v)| (u - v) * (u - v)).sum();
            best = best.min(d.sqrt());
        }
    }
    best
}

/// Compare the radius-`2 theta` upper bracket of `L(Mx, theta)` with
/// `(1-p)^k`. A false `ok` is a finding about the bracket, not an error.
pub fn verify_theta(cert: &ThetaCertificate, m: &DMatrix<f64>, p: Probability, cap: usize) -> Result<ThetaVerification> {
    verify_at_radius(cert.theta, m, p, cap)
}

pub fn verify_at_radius(radius: f64, m: &DMatrix<f64>, p: Probability, cap: usize) -> Result<ThetaVerification> {
    let bracket = vector_levy_bracket_capped(m, p, radius, cap)?;
    let k = m.nrows();
    let target = (0..k).fold(BigRational::one(), |acc, _| acc * p.complement_ratio());
    Ok(ThetaVerification {
        ok: bracket.upper <= target,
        lower: bracket.lower,
        upper: bracket.upper,
        target,
    })
}
