use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{LargeError, Result};
use crate::matrix::{CovarianceMatrix, PrecisionEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Largest `|R_ij|` over off-diagonal (penalized) entries.
    pub max_violation: f64,
    /// Largest `|R_jj|`; the diagonal is unpenalized.
    pub diag_violation: f64,
    /// Subgradient certificate.
    #[serde(skip)]
    pub gamma: DMatrix<f64>,
    pub satisfied: bool,
}

/// Stationarity residual `R = -theta^{-1} + S + L o G` with
/// `L_ij = sqrt(lambda_i lambda_j)`. `G_ij = sign(theta_ij)` on the support and
/// the feasible value closest to zeroing `R_ij` elsewhere.
pub fn kkt_check(
    est: &PrecisionEstimate,
    s: &CovarianceMatrix,
    lambda: &[f64],
    tol: f64,
) -> Result<KktReport> {
    let theta = &est.theta;
    let p = theta.nrows();
    if s.p() != p || lambda.len() != p {
        return Err(LargeError::Dimension(
            "theta, S and lambda disagree on p".into(),
        ));
    }
    let inv = Cholesky::new(theta.clone())
        .ok_or(LargeError::SingularMatrix)?
        .inverse();

    let mut gamma = DMatrix::zeros(p, p);
    let mut max_violation: f64 = 0.0;
    let mut diag_violation: f64 = 0.0;
    for i in 0..p {
        diag_violation = diag_violation.max((s.get(i, i) - inv[(i, i)]).abs());
        for j in 0..p {
            if i == j {
                continue;
            }
            let gap = inv[(i, j)] - s.get(i, j);
            let pen = (lambda[i] * lambda[j]).sqrt();
            let t = theta[(i, j)];
            let g = if t != 0.0 {
                t.signum()
            } else if pen > 0.0 {
                (gap / pen).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            gamma[(i, j)] = g;
            max_violation = max_violation.max((pen * g - gap).abs());
        }
    }
    Ok(KktReport {
        max_violation,
        diag_violation,
        gamma,
        satisfied: max_violation <= tol && diag_violation <= tol,
    })
}
