//! Solvers for partition-form cooperative games on a two-echelon supply
//! chain with one supplier and two manufacturers.
//!
//! The crate computes Stackelberg equilibria and coalition worths for every
//! operating arrangement, pessimal anticipated worths, blocking relations and
//! stable payoff regions, asymptotic worth-limits in the essential-and-
//! substitutable-manufacturer regime, and stability classifications over
//! parameter sweeps. Grid-search oracles verify every closed form.

pub mod equilibria;
pub mod error;
pub mod limits;
pub mod model;
pub mod oracle;
pub mod pricing;
pub mod stability;
pub mod sweep;
pub mod worths;

pub use equilibria::{
    alc_sbe, gc_optimum, hc_sbe, inner_game_ne, manufacturer_best_response, simultaneous_ne,
    single_chain_sbe, vc_sbe, EquilibriumOutcome, Regime,
};
pub use error::{Error, Result};
pub use model::{
    admissible_blockers, demand_profile, enumerate_partitions, Action, ActionProfile, Agent,
    BlockerPolicy, Coalition, Configuration, MarketParams, Partition, PayoffVector,
};
pub use pricing::{evaluate_utilities, solve_quadratic_pricing, QuadraticSolution};
pub use stability::{blocks, partition_classification, restricted_stable_region, stable_payoff_region, Region, StabilityReport};
pub use sweep::{sweep_classification, SweepGrid, SweepResult, SweepRow};
pub use worths::{compute_worth_table, is_consistent, pessimal_worth, scaled_worth, WorthTable};
