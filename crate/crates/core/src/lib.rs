//! Sparse Gaussian graphical model estimation with nodewise adaptive penalties.
//!
//! The crate provides:
//!
//! * [`solver::fit_large`]: block coordinate descent over the working covariance
//!   in which each nodewise Lasso subproblem learns its own penalty from a
//!   noise-variance estimate, with sparsity controlled by a sequential F-test
//!   significance level instead of a raw penalty.
//! * [`solver::fit_glasso`] and [`solver::select_lambda_cv`]: the graphical
//!   lasso baseline with a single global penalty and K-fold likelihood CV.
//! * [`autotune::autotune_lasso`]: the standalone self-tuning Lasso regression.
//! * [`dgp`]: heterogeneous-diagonal ground-truth generators and a seeded
//!   multivariate normal sampler.
//! * [`metrics`]: ROC / AUROC, off-diagonal relative error and support counts.
//! * [`experiment`]: replicated simulation studies built from the pieces above.
//!
//! Matrices are dense [`nalgebra::DMatrix<f64>`]; node indices are 0-based.

pub mod autotune;
pub mod dgp;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod solver;
pub mod stats;

pub use error::{LargeError, Result};
pub use matrix::{
    center_columns, marginal_correlation, partition, sample_covariance, soft_threshold, symmetrize,
    BlockPartition, CovarianceMatrix, DataMatrix, PrecisionEstimate,
};
pub use solver::{fit_glasso, fit_large, fit_large_diag, SolverConfig};

pub use nalgebra::{DMatrix, DVector};
