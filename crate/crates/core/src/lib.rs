//! Signal recovery from one-bit quantized measurements with time-varying
//! thresholds, solved as highly overdetermined linear feasibility problems.
//!
//! The crate is organized around the recovery pipeline:
//!
//! - [`matrix`] / [`linalg`]: dense containers and the kernels the solvers
//!   need (thin QR, triangular inverses, wide pseudo-inverses, singular
//!   values, scaled condition numbers).
//! - [`feasibility`]: four Kaczmarz-type solvers for mixed
//!   equality/inequality systems (randomized, sampling-Motzkin,
//!   preconditioned, and block variants) plus theoretical rate evaluators.
//! - [`onebit`]: sign quantization against Gaussian threshold sequences, the
//!   stacked feasibility polyhedron it induces, and the adaptive-threshold
//!   refinement loop.
//! - [`analysis`]: hyperplane-distance diagnostics, truncated
//!   moment-generating functions, Chernoff lower bounds and the rational
//!   sample-size penalty.
//! - [`experiments`]: seeded instance generators, recovery metrics, an
//!   iterative soft-thresholding baseline, and the trial-grid runner.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod feasibility;
pub mod linalg;
pub mod matrix;
pub mod onebit;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, Vector};
