//! Lévy concentration and threshold functions of weighted Bernoulli sums.
//!
//! The law of `sum b_i x_i` (or of `Mx` in `R^k`) is enumerated exactly over
//! all `2^n` outcomes of `b`. Probability masses are integer numerators over
//! the common denominator `den^n` for `p = num/den`, so every mass reported
//! here is an exact rational. Values are floating point. Two values closer
//! than [`VALUE_TOL`] (scaled by the largest magnitude in the distribution)
//! are treated as one atom.

use nalgebra::DMatrix;
use num::{BigInt, BigRational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{ratio_serde, Probability};

pub const DEFAULT_ENUMERATION_CAP: usize = 24;
pub const DEFAULT_C_LKR: f64 = 10.0;
pub const VALUE_TOL: f64 = 1e-12;
/// Orthonormality tolerance for the rows of `M`.
pub const ORTHO_TOL: f64 = 1e-10;

/// Finite law of a weighted Bernoulli sum, in one dimension or in `R^k`.
///
/// One-dimensional atoms are sorted ascending and merged. Vector atoms are
/// sorted lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomDistribution {
    dim: usize,
    points: Vec<f64>,
    masses: Vec<u128>,
    denom: u128,
    scale: f64,
}

impl AtomDistribution {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Values of a one-dimensional distribution.
    pub fn values(&self) -> &[f64] {
        &self.points
    }

    pub fn mass_numerators(&self) -> &[u128] {
        &self.masses
    }

    pub fn denominator(&self) -> u128 {
        self.denom
    }

    pub fn mass(&self, i: usize) -> BigRational {
        self.ratio(self.masses[i])
    }

    pub fn max_atom_mass(&self) -> BigRational {
        self.ratio(self.masses.iter().copied().max().unwrap_or(0))
    }

    pub fn total_mass(&self) -> BigRational {
        self.ratio(self.masses.iter().sum())
    }

    /// Absolute tolerance used when comparing values of this distribution.
    pub fn tolerance(&self) -> f64 {
        VALUE_TOL * self.scale
    }

    fn ratio(&self, numerator: u128) -> BigRational {
        BigRational::new(BigInt::from(numerator), BigInt::from(self.denom))
    }
}

fn mass_denominator(p: Probability, n: usize) -> Result<u128> {
    (p.den() as u128)
        .checked_pow(n as u32)
        .ok_or(Error::ExactnessOverflow { den: p.den(), n })
}

pub fn build_distribution(x: &[f64], p: Probability) -> Result<AtomDistribution> {
    build_distribution_capped(x, p, DEFAULT_ENUMERATION_CAP)
}

/// Law of `sum b_i x_i` for independent `b_i ~ Ber(p)`.
///
/// Built by doubling: after folding in `x_1..x_i` the sorted atom list is
/// merged with a copy of itself shifted by `x_{i+1}`.
pub fn build_distribution_capped(x: &[f64], p: Probability, cap: usize) -> Result<AtomDistribution> {
    if x.len() > cap {
        return Err(Error::EnumerationCap { n: x.len(), cap });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("weights must be finite".into()));
    }
    let denom = mass_denominator(p, x.len())?;
    let scale = 1f64.max(x.iter().map(|v| v.abs()).sum());
    let tol = VALUE_TOL * scale;
    let (keep, take) = (p.complement_num() as u128, p.num() as u128);

    let mut values = vec![0.0];
    let mut masses = vec![1u128];
    for &w in x {
        let mut merged_v = Vec::with_capacity(values.len() * 2);
        let mut merged_m = Vec::with_capacity(values.len() * 2);
        let (mut a, mut b) = (0, 0);
        let n = values.len();
        while a < n || b < n {
            let from_a = b == n || (a < n && values[a] <= values[b] + w);
            let (v, m) = if from_a {
                a += 1;
                (values[a - 1], masses[a - 1] * keep)
            } else {
                b += 1;
                (values[b - 1] + w, masses[b - 1] * take)
            };
            match merged_v.last() {
                Some(&last) if v - last <= tol => *merged_m.last_mut().unwrap() += m,
                _ => {
                    merged_v.push(v);
                    merged_m.push(m);
                }
            }
        }
        values = merged_v;
        masses = merged_m;
    }
    Ok(AtomDistribution {
        dim: 1,
        points: values,
        masses,
        denom,
        scale,
    })
}

/// Law of `Mx` for a `k x n` matrix `M` and `x` with i.i.d. Ber(p) entries.
pub fn build_vector_distribution(m: &DMatrix<f64>, p: Probability, cap: usize) -> Result<AtomDistribution> {
    let (k, n) = m.shape();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    if k == 0 {
        return Err(Error::DimensionMismatch("matrix has no rows".into()));
    }
    let denom = mass_denominator(p, n)?;
    let scale = 1f64.max(m.iter().map(|v| v.abs()).sum());
    let tol = VALUE_TOL * scale;
    let (keep, take) = (p.complement_num() as u128, p.num() as u128);

    let mut points = vec![0.0; k];
    let mut masses = vec![1u128];
    for j in 0..n {
        let col = m.column(j);
        let count = masses.len();
        let mut next: Vec<(Vec<f64>, u128)> = Vec::with_capacity(2 * count);
        for a in 0..count {
            let base = &points[a * k..(a + 1) * k];
            next.push((base.to_vec(), masses[a] * keep));
            next.push((base.iter().zip(col.iter()).map(|(u, c)| u + c).collect(), masses[a] * take));
        }
        next.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        points.clear();
        masses.clear();
        for (pt, mass) in next {
            let len = masses.len();
            if len > 0 && pt.iter().zip(&points[(len - 1) * k..]).all(|(u, v)| (u - v).abs() <= tol) {
                masses[len - 1] += mass;
            } else {
                points.extend_from_slice(&pt);
                masses.push(mass);
            }
        }
    }
    Ok(AtomDistribution {
        dim: k,
        points,
        masses,
        denom,
        scale,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (u, v) in a.iter().zip(b) {
        match u.total_cmp(v) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// `L(S, r)`: the largest mass of a closed interval of length `2r`.
///
/// An optimal interval can always be slid right until its left edge sits on
/// an atom, so a two-pointer sweep over the sorted atoms is exact.
pub fn scalar_levy(d: &AtomDistribution, r: f64) -> Result<BigRational> {
    Ok(d.ratio(scalar_levy_numerator(d, r)?))
}

fn scalar_levy_numerator(d: &AtomDistribution, r: f64) -> Result<u128> {
    if d.dim != 1 {
        return Err(Error::DimensionMismatch(format!("scalar Lévy function of a {}-dimensional law", d.dim)));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius {r} must be nonnegative")));
    }
    let v = &d.points;
    let width = 2.0 * r + d.tolerance();
    let mut best = 0u128;
    let mut window = 0u128;
    let mut j = 0;
    for i in 0..v.len() {
        while j < v.len() && v[j] - v[i] <= width {
            window += d.masses[j];
            j += 1;
        }
        best = best.max(window);
        window -= d.masses[i];
    }
    Ok(best)
}

/// Bounds on `L(Mx, r)` in `R^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevyBracket {
    #[serde(with = "ratio_serde")]
    pub lower: BigRational,
    #[serde(with = "ratio_serde")]
    pub upper: BigRational,
}

/// Bracket `L(Mx, r)` by balls centred at atoms.
///
/// `lower` uses radius `r`, `upper` radius `2r`: any radius-`r` ball of
/// positive mass contains an atom `z`, and the ball of radius `2r` about `z`
/// covers it.
pub fn vector_levy_bracket(m: &DMatrix<f64>, p: Probability, r: f64) -> Result<LevyBracket> {
    vector_levy_bracket_capped(m, p, r, DEFAULT_ENUMERATION_CAP)
}

pub fn vector_levy_bracket_capped(m: &DMatrix<f64>, p: Probability, r: f64, cap: usize) -> Result<LevyBracket> {
    check_orthonormal_rows(m)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius {r} must be nonnegative")));
    }
    let d = build_vector_distribution(m, p, cap)?;
    let lower = max_ball_mass(&d, r);
    let upper = max_ball_mass(&d, 2.0 * r);
    Ok(LevyBracket {
        lower: d.ratio(lower),
        upper: d.ratio(upper),
    })
}

fn max_ball_mass(d: &AtomDistribution, radius: f64) -> u128 {
    let k = d.dim;
    let reach = radius + d.tolerance();
    let reach_sq = reach * reach;
    let first: Vec<f64> = (0..d.len()).map(|i| d.points[i * k]).collect();
    let mut best = 0;
    for i in 0..d.len() {
        let centre = d.point(i);
        let start = first.partition_point(|&v| v < centre[0] - reach);
        let mut mass = 0u128;
        for (j, &fj) in first.iter().enumerate().skip(start) {
            if fj > centre[0] + reach {
                break;
            }
            let dist_sq: f64 = d.point(j).iter().zip(centre).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist_sq <= reach_sq {
                mass += d.masses[j];
            }
        }
        best = best.max(mass);
    }
    best
}

/// Check that `m m^T = I` to within [`ORTHO_TOL`].
pub fn check_orthonormal_rows(m: &DMatrix<f64>) -> Result<()> {
    let gram = m * m.transpose();
    let k = gram.nrows();
    let deviation = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| (gram[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    if deviation > ORTHO_TOL || deviation.is_nan() {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(())
}

/// `T_p(x, L) = sup { t in (0,1) : L(sum b_i x_i, t) > L t }`, or 0 when no
/// `t` qualifies. The largest atom alone qualifies every `t` below
/// `mass / L`, so for finite laws the result is positive.
///
/// For atoms `v_i <= v_j` let `h` be half their distance and `W` the mass of
/// `[v_i, v_j]`. Then `L(S, t) > L t` holds exactly on the union over pairs
/// of `[h, W/L)`, so the supremum is the largest `min(W/L, 1)` over pairs with
/// `h < min(W/L, 1)`.
pub fn threshold(x: &[f64], p: Probability, big_l: f64) -> Result<f64> {
    if !(big_l >= 1.0) {
        return Err(Error::InvalidArgument(format!("L = {big_l} must be at least 1")));
    }
    let d = build_distribution(x, p)?;
    Ok(threshold_of(&d, big_l))
}

fn threshold_of(d: &AtomDistribution, big_l: f64) -> f64 {
    let v = &d.points;
    let tol = d.tolerance();
    let denom = d.denom as f64;
    let mut suffix = vec![0u128; v.len() + 1];
    for i in (0..v.len()).rev() {
        suffix[i] = suffix[i + 1] + d.masses[i];
    }
    let mut best: f64 = 0.0;
    for i in 0..v.len() {
        // No window starting at atom i can reach beyond this.
        let ceiling = (suffix[i] as f64 / denom / big_l).min(1.0);
        if ceiling <= best {
            continue;
        }
        let mut window = 0u128;
        for j in i..v.len() {
            let half = ((v[j] - v[i] - tol) / 2.0).max(0.0);
            if half >= ceiling {
                break;
            }
            window += d.masses[j];
            let reach = (window as f64 / denom / big_l).min(1.0);
            if half < reach && reach > best {
                best = reach;
            }
        }
        if best >= 1.0 {
            break;
        }
    }
    best
}

/// Outcome of one Kolmogorov-Lévy-Rogozin comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LkrCheck {
    #[serde(with = "ratio_serde")]
    pub lhs: BigRational,
    /// `C r / sqrt(sum (1 - L(b_i x_i, r_i)) r_i^2)`; infinite when the sum
    /// vanishes.
    pub rhs: f64,
    pub denominator: f64,
    pub constant: f64,
    pub ok: bool,
    /// `lhs * sqrt(denominator) / r`, the smallest constant that would make
    /// this instance hold. `None` when the denominator vanishes.
    pub observed_constant: Option<f64>,
}

pub fn lkr_bound_check(x: &[f64], p: Probability, radii: &[f64], r: f64, c: f64) -> Result<LkrCheck> {
    if x.len() != radii.len() {
        return Err(Error::DimensionMismatch(format!("{} weights but {} radii", x.len(), radii.len())));
    }
    if x.contains(&0.0) {
        return Err(Error::InvalidArgument("weights must be nonzero".into()));
    }
    if radii.iter().any(|&ri| !(ri > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    let max_ri = radii.iter().copied().fold(0.0, f64::max);
    if !(r >= max_ri) {
        return Err(Error::InvalidArgument(format!("r = {r} is below max r_i = {max_ri}")));
    }
    let lhs = scalar_levy(&build_distribution(x, p)?, r)?;
    let mut denominator = 0.0;
    for (&xi, &ri) in x.iter().zip(radii) {
        let single = build_distribution(&[xi], p)?;
        let li = crate::prob::ratio_to_f64(&scalar_levy(&single, ri)?);
        denominator += (1.0 - li) * ri * ri;
    }
    let lhs_f = crate::prob::ratio_to_f64(&lhs);
    let (rhs, observed_constant) = if denominator > 0.0 {
        (c * r / denominator.sqrt(), Some(lhs_f * denominator.sqrt() / r))
    } else {
        (f64::INFINITY, None)
    };
    Ok(LkrCheck {
        lhs,
        rhs,
        denominator,
        constant: c,
        ok: lhs_f <= rhs,
        observed_constant,
    })
}
