use nalgebra::Cholesky;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::glasso::{fit_glasso_with, GlassoOptions};
use crate::error::{LargeError, Result};
use crate::matrix::{center_columns, sample_covariance, CovarianceMatrix, DataMatrix};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambda: f64,
    pub grid: Vec<f64>,
    /// Mean held-out score per grid value.
    pub scores: Vec<f64>,
    /// `fold_scores[g][k]`: score of grid value `g` on fold `k`.
    pub fold_scores: Vec<Vec<f64>>,
}

/// `n_points` log-spaced values from `ratio * lam_max` to `lam_max`, where
/// `lam_max = max_{i != j} |S_ij|` is the smallest penalty giving an empty graph.
pub fn lambda_grid(s: &CovarianceMatrix, n_points: usize, ratio: f64) -> Result<Vec<f64>> {
    if n_points == 0 {
        return Err(LargeError::param("n_points", "must be >= 1"));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(LargeError::param("ratio", "must lie in (0, 1]"));
    }
    let p = s.p();
    let mut lam_max: f64 = 0.0;
    for i in 0..p {
        for j in i + 1..p {
            lam_max = lam_max.max(s.get(i, j).abs());
        }
    }
    if lam_max == 0.0 {
        return Err(LargeError::param("S", "no off-diagonal covariance"));
    }
    if n_points == 1 {
        return Ok(vec![lam_max]);
    }
    let (lo, hi) = ((ratio * lam_max).ln(), lam_max.ln());
    Ok((0..n_points)
        .map(|g| (lo + (hi - lo) * g as f64 / (n_points - 1) as f64).exp())
        .collect())
}

/// K-fold cross-validation of the graphical lasso penalty. Each fold is scored
/// by the held-out log-likelihood `log det theta - tr(S_test theta)`; the grid
/// value with the largest mean wins, ties going to the larger penalty.
pub fn select_lambda_cv(x: &DataMatrix, grid: &[f64], k: usize, seed: u64) -> Result<CvResult> {
    if k < 2 {
        return Err(LargeError::param("k", "need at least 2 folds"));
    }
    if grid.is_empty() || grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(LargeError::param("grid", "must be non-empty and positive"));
    }
    let n = x.n();
    let p = x.p();
    if n / k < 2 {
        return Err(LargeError::param("k", "folds must hold at least 2 rows"));
    }
    if n - n.div_ceil(k) < p {
        log::warn!("cv: training folds have fewer rows than variables; ridge safeguard applies");
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, 0));
    let folds: Vec<(CovarianceMatrix, CovarianceMatrix)> = (0..k)
        .map(|f| {
            let lo = f * n / k;
            let hi = (f + 1) * n / k;
            let test: Vec<usize> = perm[lo..hi].to_vec();
            let train: Vec<usize> = perm[..lo].iter().chain(&perm[hi..]).copied().collect();
            Ok((fold_cov(x, &train)?, fold_cov(x, &test)?))
        })
        .collect::<Result<_>>()?;

    let opts = GlassoOptions {
        tol: 1e-4,
        max_outer: 200,
        ..GlassoOptions::default()
    };
    let mut fold_scores = Vec::with_capacity(grid.len());
    for &lam in grid {
        let row: Vec<f64> = folds
            .iter()
            .map(|(train, test)| match fit_glasso_with(train, lam, &opts) {
                Ok((est, _)) => heldout_score(&est.theta, test),
                Err(_) => f64::NEG_INFINITY,
            })
            .collect();
        fold_scores.push(row);
    }
    let scores: Vec<f64> = fold_scores
        .iter()
        .map(|r| r.iter().sum::<f64>() / k as f64)
        .collect();

    let mut best = 0;
    for g in 1..grid.len() {
        let better =
            scores[g] > scores[best] || (scores[g] == scores[best] && grid[g] > grid[best]);
        if better {
            best = g;
        }
    }
    Ok(CvResult {
        lambda: grid[best],
        grid: grid.to_vec(),
        scores,
        fold_scores,
    })
}

fn fold_cov(x: &DataMatrix, rows: &[usize]) -> Result<CovarianceMatrix> {
    let sub = DataMatrix::new(x.values().select_rows(rows.iter()))?;
    sample_covariance(&center_columns(&sub))
}

/// `log det theta - tr(S theta)`; `-inf` if `theta` is not positive definite.
pub(crate) fn heldout_score(theta: &nalgebra::DMatrix<f64>, s: &CovarianceMatrix) -> f64 {
    let Some(chol) = Cholesky::new(theta.clone()) else {
        return f64::NEG_INFINITY;
    };
    let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    logdet - s.values().component_mul(theta).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn data() -> DataMatrix {
        let x = DMatrix::from_fn(40, 3, |i, j| {
            ((i * 7 + j * 13) % 11) as f64 + (i % 3) as f64 * j as f64
        });
        center_columns(&DataMatrix::new(x).unwrap())
    }

    #[test]
    fn grid_endpoints() {
        let s = CovarianceMatrix::from_matrix(
            DMatrix::from_row_slice(2, 2, &[1.0, -0.4, -0.4, 1.0]),
            10,
        )
        .unwrap();
        let g = lambda_grid(&s, 10, 0.01).unwrap();
        assert_eq!(g.len(), 10);
        assert!((g[9] - 0.4).abs() < 1e-15);
        assert!((g[0] - 0.004).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_value_grid() {
        let r = select_lambda_cv(&data(), &[0.3], 5, 1).unwrap();
        assert_eq!(r.lambda, 0.3);
        assert_eq!(r.scores.len(), 1);
    }

    #[test]
    fn scores_cover_grid() {
        let grid = [0.05, 0.1, 0.5, 1.0];
        let r = select_lambda_cv(&data(), &grid, 4, 3).unwrap();
        assert_eq!(r.scores.len(), grid.len());
        assert!(r.scores.iter().all(|s| s.is_finite()));
        let best = r.scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let idx = grid.iter().position(|&l| l == r.lambda).unwrap();
        assert_eq!(r.scores[idx], best);
    }

    #[test]
    fn rejects_bad_folds() {
        assert!(select_lambda_cv(&data(), &[0.1], 1, 0).is_err());
        assert!(select_lambda_cv(&data(), &[0.1], 30, 0).is_err());
        assert!(select_lambda_cv(&data(), &[], 3, 0).is_err());
    }
}
