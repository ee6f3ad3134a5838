//! Exact and Monte Carlo study of the corank of random Bernoulli matrices.
//!
//! * [`matrix`] and [`rank`]: 0/1 matrices, seeded sampling, exact rank.
//! * [`anticoncentration`]: Lévy concentration and threshold functions of
//!   weighted Bernoulli sums, computed by exact enumeration.
//! * [`geometry`]: compressible vectors, smallest singular values, operator
//!   norms on the centred hyperplane.
//! * [`restricted_invertibility`]: column subsets with a controlled inverse.
//! * [`theta`]: certified small-ball radius for `Mx` when `M` has
//!   orthonormal rows.
//! * [`experiments`]: corank enumeration, Monte Carlo, bound tables.
//! * [`cli`]: the `corank-lab` command line.

// `!(x >= 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anticoncentration;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod matrix;
pub mod prob;
pub mod rank;
pub mod restricted_invertibility;
pub mod theta;

pub use error::{Error, Result};
pub use matrix::{sample_matrix, BernoulliMatrix};
pub use prob::Probability;
pub use rank::{rank_mod_prime, rank_rational, RankResult};
