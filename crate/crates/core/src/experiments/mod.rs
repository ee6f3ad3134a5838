//! Exact enumeration, Monte Carlo estimation, and bound tables.

pub mod bounds;
pub mod enumerate;
pub mod montecarlo;

pub use bounds::{bound_row, bound_table, BoundRow};
pub use enumerate::{enumerate_corank, enumeration_table, CorankDistribution, EnumerationTable};
pub use montecarlo::{fixed_vector_event_mc, mc_corank, operator_norm_calibration, wilson_interval, EstimateKind, EstimateRecord};
