//! Residuals, discrete norms, stability and consistency diagnostics.

mod consistency;
mod gronwall;
pub mod norms;
pub mod residual;
mod stability;
mod telescoping;

pub use consistency::{consistency_terms, ConsistencyReport};
pub use gronwall::{gronwall_check, gronwall_extremal, lemma_constant, mittag_leffler, GronwallReport};
pub use norms::{
    burkholder_constant, lp_estimate, max_over_nodes, spijker_from_partial_sums, two_sided_ratio, LpEstimate,
    NormReport,
};
pub use residual::{
    partial_sum_norms, reconstruct, residual, spijker_norm, spijker_norm_of_difference, sup_norm,
    sup_norm_of_difference, ResidualField,
};
pub use stability::{
    estimate_bistability, initial_norm, verify_increment_stability, BistabilityReport, StabilityReport,
};
pub use telescoping::{discrete_power, discrete_semigroup_matrix, telescoping_deviation};
