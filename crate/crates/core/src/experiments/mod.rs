//! Instance generators, recovery metrics, the soft-thresholding baseline and
//! the seeded trial-grid runner behind the reproduction studies.

mod gen;
mod grid;
mod ista;
mod metrics;

pub use gen::{gen_gaussian_matrix, gen_gaussian_vector, gen_low_rank_target, gen_sparse_target};
pub use grid::{
    derive_trial_seed, mean_nmse, run_trial_grid, ExperimentKind, ExperimentSpec, TrialRecord,
};
pub use ista::ista_l1_baseline;
pub use metrics::{nmse_matrix, nmse_vector, one_bit_log_likelihood, GaussianCdf};
