use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into three families that the command line maps onto exit
/// codes: invalid input, resource refusal (caps and budgets), and internal
/// invariant violations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {0} is outside (0, 1/2]")]
    InvalidProbability(String),

    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    ZeroDimension { rows: usize, cols: usize },

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("rows are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is rank deficient (smallest singular value {sigma:e})")]
    RankDeficient { sigma: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("enumeration of {n} weights exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("exact mass denominator {den}^{n} does not fit in 128 bits")]
    ExactnessOverflow { den: u64, n: usize },

    #[error("combinatorial budget exceeded: {needed} subsets > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("exact enumeration refused for n = {n} (maximum {max})")]
    EnumerationRefused { n: usize, max: usize },

    #[error("refused: {0}")]
    Refused(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Whether this error is a refusal to run because a cap or budget was hit.
    pub fn is_resource_refusal(&self) -> bool {
        matches!(
            self,
            Error::EnumerationCap { .. }
                | Error::ExactnessOverflow { .. }
                | Error::BudgetExceeded { .. }
                | Error::EnumerationRefused { .. }
                | Error::Refused(_)
        )
    }

    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
