//! Compressible vectors and the spectral quantities around them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

pub const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VectorLabel {
    Comp,
    Incomp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VectorClass {
    pub label: VectorLabel,
    pub delta: f64,
    pub rho: f64,
    /// Distance to the set of `floor(delta n)`-sparse vectors.
    pub distance: f64,
    pub sparsity: usize,
}

fn check_unit(x: &[f64]) -> Result<()> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL || norm.is_nan() {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

/// Indices of the `s` largest `|x_j|`, ties broken toward the smaller index.
pub fn top_indices(x: &[f64], s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    order.truncate(s);
    order
}

/// Distance from the unit vector `x` to the set of `s`-sparse vectors: the
/// norm of what is left after zeroing the `s` largest entries.
pub fn distance_to_sparse(x: &[f64], s: usize) -> Result<f64> {
    check_unit(x)?;
    if s > x.len() {
        return Err(Error::InvalidArgument(format!("sparsity {s} exceeds dimension {}", x.len())));
    }
    let mut kept = vec![true; x.len()];
    for j in top_indices(x, s) {
        kept[j] = false;
    }
    Ok(x.iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(v, _)| v * v)
        .sum::<f64>()
        .sqrt())
}

pub fn classify_vector(x: &[f64], delta: f64, rho: f64) -> Result<VectorClass> {
    if !(delta > 0.0 && delta < 1.0) || !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} and rho = {rho} must lie in (0, 1)"
        )));
    }
    // floor(delta n), guarded against products like 0.1 * 30 = 3.0000000000000004.
    let sparsity = ((delta * x.len() as f64) + 1e-9).floor() as usize;
    let distance = distance_to_sparse(x, sparsity.min(x.len()))?;
    let label = if distance <= rho {
        VectorLabel::Comp
    } else {
        VectorLabel::Incomp
    };
    Ok(VectorClass {
        label,
        delta,
        rho,
        distance,
        sparsity,
    })
}

/// `sigma_k` of a `k x m` matrix with `k <= m`, from the eigenvalues of `a a^T`.
pub fn smallest_singular_value(a: &DMatrix<f64>) -> Result<f64> {
    let (k, m) = a.shape();
    if k > m {
        return Err(Error::DimensionMismatch(format!("{k}x{m} matrix has more rows than columns")));
    }
    if k == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    let gram = a * a.transpose();
    let min_eig = gram.symmetric_eigen().eigenvalues.min();
    Ok(min_eig.max(0.0).sqrt())
}

pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Spectral norm of `m` restricted to `H = { x : sum x_i = 0 }`, i.e. of
/// `m P` with `P = I - J/n` the orthogonal projection onto `H`.
pub fn restricted_operator_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut centred = m.clone();
    for mut row in centred.row_iter_mut() {
        let mean = row.sum() / n as f64;
        row.add_scalar_mut(-mean);
    }
    spectral_norm(&centred)
}
