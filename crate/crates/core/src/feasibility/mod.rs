//! Kaczmarz-type solvers for linear feasibility problems.
//!
//! A problem mixes equality rows and `<=` rows. The canonical residual used
//! for both stopping and reporting keeps the sign on equality rows and clamps
//! inequality rows at zero, so a zero residual vector means feasibility.

mod problem;
mod rates;
mod solvers;

pub use problem::{
    positive_residual, residual_norm, sample_row_index, FeasibilityProblem, Method, RowSampler,
    RowSense, SolveReport, SolverConfig,
};
pub use rates::{rate_rka, rate_skm, rate_skm_tight};
pub use solvers::{solve, solve_block_skm, solve_prskm, solve_rka, solve_skm};
