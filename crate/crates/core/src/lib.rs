//! Validation set cover: set cover where sets are owned by agents that each
//! execute a bounded number of sets per round, and the goal is to minimize
//! the busiest agent's round count.
//!
//! - [`model`]: instances, solutions, the objective, JSON formats
//! - [`greedy`]: the round-based greedy with residual tracing
//! - [`exact`]: budgeted exact oracle, residual optima
//! - [`baseline`]: ownership-blind greedy set cover for comparison
//! - [`generate`]: seeded random and traceroute-style instance generators
//! - [`analysis`]: approximation-bound diagnostics and corpus aggregation

pub mod analysis;
pub mod baseline;
pub mod bitset;
pub mod error;
pub mod exact;
pub mod generate;
pub mod greedy;
pub mod model;

pub use bitset::ElementSet;
pub use error::{Error, Result};
pub use exact::{exact_solve, residual_opt, ExactSolution, OracleError, OracleLimits};
pub use greedy::{greedy_solve, residual_state, GreedyConfig, ResidualTrace};
pub use model::{
    load_instance, load_solution, objective, save_instance, save_solution, verify_solution,
    Instance, Solution, VerificationReport,
};
