//! Seeded Monte Carlo estimates.
//!
//! Trials are cut into chunks of [`CHUNK_TRIALS`]. Chunk `i` draws from
//! `stream_rng(seed, i)`, i.e. `ChaCha8Rng::seed_from_u64(seed)` with
//! `set_stream(i)`. Chunk results are merged in chunk order, so an estimate
//! depends only on its inputs and seed, never on the number of threads.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::anticoncentration::check_orthonormal_rows;
use crate::error::{Error, Result};
use crate::geometry::restricted_operator_norm;
use crate::matrix::{fill_bernoulli, stream_rng, GENERATOR_VERSION};
use crate::prob::Probability;
use crate::rank::{rank_mod_prime_entries, rank_rational_entries, SCREEN_PRIME};

pub const CHUNK_TRIALS: u64 = 4096;
pub const MAX_MC_DIMENSION: usize = 64;
/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Corank,
    FixedVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub event: EstimateKind,
    pub n: usize,
    pub k: usize,
    pub p: Probability,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub generator_version: &'static str,
    /// Set when no trial hit; `rule_of_three` then holds `3 / trials`.
    pub below_resolution: bool,
    pub rule_of_three: Option<f64>,
    /// HS-norm scale `c` of the fixed-vector event.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(hits: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let phat = hits as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if hits == 0 { 0.0 } else { (centre - half).clamp(0.0, phat) };
    let high = if hits == trials { 1.0 } else { (centre + half).clamp(phat, 1.0) };
    (low, high)
}

/// Run `trials` trials in seeded chunks; `chunk` receives the chunk's
/// generator and trial count and returns one partial result per chunk,
/// in chunk order.
pub fn run_chunks<T, F>(trials: u64, seed: u64, chunk: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let count = CHUNK_TRIALS.min(trials - i * CHUNK_TRIALS);
            chunk(&mut rng, count)
        })
        .collect()
}

fn record(event: EstimateKind, n: usize, k: usize, p: Probability, trials: u64, hits: u64, seed: u64) -> EstimateRecord {
    let (ci_low, ci_high) = wilson_interval(hits, trials);
    EstimateRecord {
        event,
        n,
        k,
        p,
        trials,
        hits,
        estimate: hits as f64 / trials as f64,
        ci_low,
        ci_high,
        seed,
        generator_version: GENERATOR_VERSION,
        below_resolution: hits == 0,
        rule_of_three: (hits == 0).then(|| 3.0 / trials as f64),
        c: None,
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Estimate `P[corank M_n >= k]`.
///
/// A matrix whose rank mod [`SCREEN_PRIME`] already rules out corank `k` is
/// a miss (modular rank never exceeds rational rank); every other matrix is
/// decided by exact rational rank.
pub fn mc_corank(n: usize, p: Probability, k: usize, trials: u64, seed: u64) -> Result<EstimateRecord> {
    check_trials(trials)?;
    if n == 0 {
        return Err(Error::ZeroDimension { rows: 0, cols: 0 });
    }
    if n > MAX_MC_DIMENSION {
        return Err(Error::Refused(format!("n = {n} exceeds {MAX_MC_DIMENSION}")));
    }
    if k > n {
        return Ok(record(EstimateKind::Corank, n, k, p, trials, 0, seed));
    }
    let hits: u64 = run_chunks(trials, seed, |rng, count| {
        let mut entries = vec![0u8; n * n];
        let mut mod_scratch = Vec::new();
        let mut rat_scratch = Vec::new();
        let mut hits = 0;
        for _ in 0..count {
            fill_bernoulli(rng, p, &mut entries);
            let screened = rank_mod_prime_entries(&entries, n, n, SCREEN_PRIME, &mut mod_scratch);
            if n - screened < k {
                continue;
            }
            if n - rank_rational_entries(&entries, n, n, &mut rat_scratch) >= k {
                hits += 1;
            }
        }
        hits
    })
    .into_iter()
    .sum();
    Ok(record(EstimateKind::Corank, n, k, p, trials, hits, seed))
}

/// Estimate `P[||M V||_HS <= c sqrt(n)]` for an `(n-k) x n` Ber(p) matrix `M`
/// and a fixed `n x k` matrix `V` with orthonormal columns.
pub fn fixed_vector_event_mc(v: &DMatrix<f64>, p: Probability, c: f64, trials: u64, seed: u64) -> Result<EstimateRecord> {
    check_trials(trials)?;
    let (n, k) = v.shape();
    if k == 0 || k >= n {
        return Err(Error::DimensionMismatch(format!("need 1 <= k < n, got V of shape {n}x{k}")));
    }
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!("c = {c} must be nonnegative")));
    }
    check_orthonormal_rows(&v.transpose())?;
    let rows = n - k;
    let limit = c * c * n as f64 * (1.0 + 1e-12);
    // Column-major storage: column j of V occupies [j*n, (j+1)*n).
    let columns: Vec<f64> = v.iter().copied().collect();
    let hits: u64 = run_chunks(trials, seed, |rng, count| {
        let mut entries = vec![0u8; rows * n];
        let mut hits = 0;
        for _ in 0..count {
            fill_bernoulli(rng, p, &mut entries);
            let mut hs_sq = 0.0;
            for row in entries.chunks_exact(n) {
                for col in columns.chunks_exact(n) {
                    let dot: f64 = row.iter().zip(col).filter(|(&b, _)| b == 1).map(|(_, &x)| x).sum();
                    hs_sq += dot * dot;
                }
            }
            if hs_sq <= limit {
                hits += 1;
            }
        }
        hits
    })
    .into_iter()
    .sum();
    let mut rec = record(EstimateKind::FixedVector, n, k, p, trials, hits, seed);
    rec.c = Some(c);
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorNormCalibration {
    pub n: usize,
    pub k: usize,
    pub p: Probability,
    pub samples: u64,
    pub seed: u64,
    /// Largest and mean `||M|_H|| / sqrt(n)` over the samples.
    pub max_scaled_norm: f64,
    pub mean_scaled_norm: f64,
    pub generator_version: &'static str,
}

/// Sample `(n-k) x n` Ber(p) matrices and measure their operator norm on
/// the hyperplane orthogonal to the all-ones vector, scaled by `sqrt(n)`.
pub fn operator_norm_calibration(n: usize, k: usize, p: Probability, samples: u64, seed: u64) -> Result<OperatorNormCalibration> {
    check_trials(samples)?;
    if k >= n {
        return Err(Error::DimensionMismatch(format!("need k < n, got k = {k}, n = {n}")));
    }
    let rows = n - k;
    let scale = (n as f64).sqrt();
    let partial = run_chunks(samples, seed, |rng, count| {
        let mut entries = vec![0u8; rows * n];
        let (mut max, mut sum) = (0.0f64, 0.0);
        for _ in 0..count {
            fill_bernoulli(rng, p, &mut entries);
            let m = DMatrix::from_row_iterator(rows, n, entries.iter().map(|&e| e as f64));
            let norm = restricted_operator_norm(&m) / scale;
            max = max.max(norm);
            sum += norm;
        }
        (max, sum)
    });
    let max_scaled_norm = partial.iter().map(|&(m, _)| m).fold(0.0, f64::max);
    let mean_scaled_norm = partial.iter().map(|&(_, s)| s).sum::<f64>() / samples as f64;
    Ok(OperatorNormCalibration {
        n,
        k,
        p,
        samples,
        seed,
        max_scaled_norm,
        mean_scaled_norm,
        generator_version: GENERATOR_VERSION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for (h, t) in [(0, 10), (1, 10), (5, 10), (10, 10), (625, 1000)] {
            let (lo, hi) = wilson_interval(h, t);
            let est = h as f64 / t as f64;
            assert!(lo <= est && est <= hi, "{h}/{t}: [{lo}, {hi}]");
        }
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn impossible_corank() {
        let r = mc_corank(2, Probability::HALF, 3, 10, 1).unwrap();
        assert_eq!(r.hits, 0);
        assert_eq!(r.estimate, 0.0);
        assert!(r.below_resolution);
        assert_eq!(r.rule_of_three, Some(0.3));
    }

    #[test]
    fn deterministic_and_chunk_stable() {
        let a = mc_corank(3, Probability::HALF, 1, 10_000, 9).unwrap();
        let b = mc_corank(3, Probability::HALF, 1, 10_000, 9).unwrap();
        assert_eq!(a, b);
        let c = mc_corank(3, Probability::HALF, 1, 10_000, 10).unwrap();
        assert_ne!(a.hits, c.hits);
    }

    #[test]
    fn fixed_vector_trivial_cases() {
        let mut v = DMatrix::zeros(8, 1);
        v[(0, 0)] = 1.0;
        let r = fixed_vector_event_mc(&v, Probability::HALF, 100.0, 1000, 3).unwrap();
        assert_eq!(r.hits, 1000);
        assert_eq!(r.k, 1);
        let p = Probability::new(1, 4).unwrap();
        let r = fixed_vector_event_mc(&v, p, 0.0, 20_000, 3).unwrap();
        let exact = 0.75f64.powi(7);
        assert!(r.ci_low <= exact && exact <= r.ci_high, "{r:?}");
    }

    #[test]
    fn fixed_vector_rejects_bad_columns() {
        let v = DMatrix::from_element(4, 1, 1.0);
        assert!(matches!(
            fixed_vector_event_mc(&v, Probability::HALF, 0.1, 10, 1),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn calibration_runs() {
        let c = operator_norm_calibration(12, 2, Probability::HALF, 50, 5).unwrap();
        assert!(c.max_scaled_norm >= c.mean_scaled_norm && c.mean_scaled_norm > 0.0);
    }
}
