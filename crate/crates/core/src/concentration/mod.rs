//! Concentration bounds for functions of Gumbel variables, and quadrature
//! validators for the Poincaré and modified log-Sobolev inequalities that
//! underpin them.

mod bounds;
mod inequality;
pub mod suite;

pub use bounds::{
    corollary2_bound, epsilon_delta_plan, exp_moment_bound, gumbel_denominator_infimum, gumbel_poincare_constant,
    log_sobolev_prefactor, ratio_guarantee, two_sided_bound, BoundParams,
};
pub use inequality::{
    check_gumbel_poincare, check_modified_log_sobolev, check_poincare, InequalityReport, LogConcaveDensity,
    ScalarFunction, Verdict,
};
