//! Graphical model solvers.
//!
//! Both solvers run block coordinate descent over the working covariance `W`,
//! one row/column per step, with the diagonal of `W` pinned to `diag(S)`.
//! [`fit_glasso`] uses one global penalty; [`fit_large`] learns a penalty per
//! node from an F-test based noise-variance estimate.

mod config;
mod cv;
mod glasso;
mod kkt;
mod large;

pub use config::{DiagReconstruction, GuidingScope, PenaltyMode, SolverConfig};
pub use cv::{lambda_grid, select_lambda_cv, CvResult};
pub use glasso::{
    fit_glasso, fit_glasso_with, glasso_dual_objective, glasso_objective, GlassoOptions,
};
pub use kkt::{kkt_check, KktReport};
pub use large::{
    assemble_columns, check_convergence, fit_large, fit_large_diag, reconstruct_theta, LargeState,
};

use nalgebra::DMatrix;

use crate::matrix::{min_eigenvalue, CovarianceMatrix};

/// Eigenvalue floor, relative to `mean(diag S)`, below which `S` is ridged.
pub(crate) const RIDGE_TRIGGER: f64 = 1e-8;

/// `W <- S`, plus `ridge_eps * mean(diag S)` on the diagonal when `S` is
/// numerically singular. Returns the working matrix and the ridge added.
pub(crate) fn initial_working(s: &CovarianceMatrix, ridge_eps: f64) -> (DMatrix<f64>, f64) {
    let mut w = s.values().clone();
    let p = s.p();
    let mean_diag = s.diag().sum() / p as f64;
    let ridge = if min_eigenvalue(&w) <= RIDGE_TRIGGER * mean_diag {
        ridge_eps * mean_diag
    } else {
        0.0
    };
    if ridge > 0.0 {
        for i in 0..p {
            w[(i, i)] += ridge;
        }
    }
    (w, ridge)
}

/// Writes `w12` into row and column `j` of `w`, leaving the diagonal alone.
pub(crate) fn write_offdiag(w: &mut DMatrix<f64>, j: usize, w12: &nalgebra::DVector<f64>) {
    let p = w.nrows();
    for a in 0..p - 1 {
        let i = crate::matrix::skip_index(a, j);
        w[(i, j)] = w12[a];
        w[(j, i)] = w12[a];
    }
}

/// `|A - B|_F / |B|_F`.
pub(crate) fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
