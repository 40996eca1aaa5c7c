use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{initial_working, relative_frobenius, write_offdiag};
use crate::error::{LargeError, Result};
use crate::matrix::{
    partition, skip_index, soft_threshold, support_of, CovarianceMatrix, PrecisionEstimate,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlassoOptions {
    /// Relative Frobenius change of `W` that ends the outer loop.
    pub tol: f64,
    pub max_outer: usize,
    /// Inner coordinate descent stops when `max_k V_kk |delta beta_k|` falls
    /// below `inner_tol * mean(diag S)`.
    pub inner_tol: f64,
    pub max_inner: usize,
    pub ridge_eps: f64,
    /// Record the penalized objective after each sweep (costs a factorization).
    pub track_objective: bool,
}

impl Default for GlassoOptions {
    fn default() -> Self {
        GlassoOptions {
            tol: 1e-6,
            max_outer: 500,
            inner_tol: 1e-9,
            max_inner: 10_000,
            ridge_eps: 1e-6,
            track_objective: false,
        }
    }
}

/// Graphical lasso with one penalty on all off-diagonal entries.
pub fn fit_glasso(
    s: &CovarianceMatrix,
    lam: f64,
    tol: f64,
    max_outer: usize,
) -> Result<PrecisionEstimate> {
    let opts = GlassoOptions {
        tol,
        max_outer,
        inner_tol: (tol * 1e-3).min(1e-6),
        ..GlassoOptions::default()
    };
    fit_glasso_with(s, lam, &opts).map(|(est, _)| est)
}

/// Like [`fit_glasso`]; also returns the objective after each sweep when
/// `opts.track_objective` is set.
pub fn fit_glasso_with(
    s: &CovarianceMatrix,
    lam: f64,
    opts: &GlassoOptions,
) -> Result<(PrecisionEstimate, Vec<f64>)> {
    if !(lam >= 0.0) || !lam.is_finite() {
        return Err(LargeError::param("lambda", "must be finite and >= 0"));
    }
    if !(opts.tol > 0.0) || opts.max_outer == 0 {
        return Err(LargeError::param(
            "tol/max_outer",
            "tolerance must be positive and max_outer >= 1",
        ));
    }
    let p = s.p();
    if p < 2 {
        return Err(LargeError::Dimension("need p >= 2".into()));
    }
    let (mut w, ridge) = initial_working(s, opts.ridge_eps);
    let mean_diag = s.diag().sum() / p as f64;
    let inner_tol = opts.inner_tol * mean_diag;
    let mut betas: Vec<DVector<f64>> = vec![DVector::zeros(p - 1); p];
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < opts.max_outer {
        sweeps += 1;
        let w_old = w.clone();
        for j in 0..p {
            let block = partition(&w, j)?;
            let s12 = DVector::from_fn(p - 1, |a, _| s.get(skip_index(a, j), j));
            let beta = &mut betas[j];
            lasso_cd(&block.w11, &s12, lam, beta, inner_tol, opts.max_inner);
            let w12 = &block.w11 * &*beta;
            write_offdiag(&mut w, j, &w12);
        }
        let rel = relative_frobenius(&w, &w_old);
        history.push(rel);
        if opts.track_objective {
            trace.push(match reconstruct(&w, &betas) {
                Ok(theta) => glasso_objective(&theta, s, lam),
                Err(_) => f64::INFINITY,
            });
        }
        if rel < opts.tol {
            converged = true;
            break;
        }
    }

    let theta = reconstruct(&w, &betas)?;
    if Cholesky::new(theta.clone()).is_none() {
        return Err(LargeError::LostPositiveDefiniteness);
    }
    let support = support_of(&theta);
    let sigma2 = (0..p).map(|j| 1.0 / theta[(j, j)]).collect();
    Ok((
        PrecisionEstimate {
            theta,
            w,
            sigma2,
            sigma2_initial: Vec::new(),
            lambda: vec![lam; p],
            support,
            converged,
            sweeps,
            positive_definite: true,
            ridge,
            history,
        },
        trace,
    ))
}

/// Cyclic coordinate descent for `V beta - s12 + lam * sign(beta) = 0`,
/// warm-started from `beta`.
fn lasso_cd(
    v: &DMatrix<f64>,
    s12: &DVector<f64>,
    lam: f64,
    beta: &mut DVector<f64>,
    tol: f64,
    max_iter: usize,
) {
    let m = s12.len();
    let mut vb = v * &*beta;
    for _ in 0..max_iter {
        let mut max_step: f64 = 0.0;
        for k in 0..m {
            let vkk = v[(k, k)];
            let old = beta[k];
            let g = s12[k] - vb[k] + vkk * old;
            let new = soft_threshold(g, lam) / vkk;
            if new != old {
                let d = new - old;
                vb.axpy(d, &v.column(k), 1.0);
                beta[k] = new;
                max_step = max_step.max(vkk * d.abs());
            }
        }
        if max_step < tol {
            break;
        }
    }
}

/// `theta_jj = 1 / (w_jj - w12' beta)`, `theta_{-j,j} = -beta theta_jj`,
/// then averaged with its transpose.
fn reconstruct(w: &DMatrix<f64>, betas: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let p = w.nrows();
    let mut raw = DMatrix::zeros(p, p);
    for (j, beta) in betas.iter().enumerate() {
        let mut dot = 0.0;
        for a in 0..p - 1 {
            dot += w[(skip_index(a, j), j)] * beta[a];
        }
        let denom = w[(j, j)] - dot;
        if !(denom > 0.0) {
            return Err(LargeError::LostPositiveDefiniteness);
        }
        let tjj = 1.0 / denom;
        raw[(j, j)] = tjj;
        for a in 0..p - 1 {
            raw[(skip_index(a, j), j)] = -beta[a] * tjj;
        }
    }
    Ok(crate::matrix::symmetrize(&raw))
}

/// `-log det(theta) + tr(S theta) + lam * sum_{i != j} |theta_ij|`;
/// `+inf` when `theta` is not positive definite.
pub fn glasso_objective(theta: &DMatrix<f64>, s: &CovarianceMatrix, lam: f64) -> f64 {
    let Some(chol) = Cholesky::new(theta.clone()) else {
        return f64::INFINITY;
    };
    let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let p = theta.nrows();
    let mut off = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                off += theta[(i, j)].abs();
            }
        }
    }
    -logdet + (s.values() * theta).trace() + lam * off
}

/// `-log det(W)`; the negated dual objective, non-increasing under exact
/// block updates.
pub fn glasso_dual_objective(w: &DMatrix<f64>) -> f64 {
    match Cholesky::new(w.clone()) {
        Some(c) => -2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cov(v: &[f64], p: usize) -> CovarianceMatrix {
        CovarianceMatrix::from_matrix(DMatrix::from_row_slice(p, p, v), 100).unwrap()
    }

    #[test]
    fn large_penalty_gives_diagonal() {
        let s = cov(&[2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 4.0], 3);
        let est = fit_glasso(&s, 0.3, 1e-8, 100).unwrap();
        assert!(est.support.is_empty());
        for j in 0..3 {
            assert_relative_eq!(est.theta[(j, j)], 1.0 / s.get(j, j), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_penalty_inverts() {
        let s = cov(&[2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 4.0], 3);
        let est = fit_glasso(&s, 0.0, 1e-10, 1000).unwrap();
        let inv = s.values().clone().try_inverse().unwrap();
        assert!((&est.theta - inv).amax() < 1e-6);
    }

    #[test]
    fn two_by_two_stationarity() {
        // W_12 = S_12 - lam * sign = 0.5 - 0.2
        let s = cov(&[1.0, 0.5, 0.5, 1.0], 2);
        let est = fit_glasso(&s, 0.2, 1e-10, 100).unwrap();
        assert_relative_eq!(est.w[(0, 1)], 0.3, epsilon = 1e-12);
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0])
            .try_inverse()
            .unwrap();
        assert!((&est.theta - expect).amax() < 1e-10);
        assert_eq!(est.w.diagonal(), s.diag());
    }

    #[test]
    fn rejects_negative_lambda() {
        let s = cov(&[1.0, 0.0, 0.0, 1.0], 2);
        assert!(fit_glasso(&s, -0.1, 1e-6, 10).is_err());
    }
}
