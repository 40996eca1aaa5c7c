use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use super::fdist::FCutoffTable;
use super::ols::IncrementalOls;
use crate::error::{LargeError, Result};

/// Result of sequential F-test forward selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSelectionResult {
    /// Selected predictor indices, in order of entry.
    pub support: Vec<usize>,
    /// `rss / (n - |support|)`.
    pub sigma2_hat: f64,
    pub rss: f64,
    pub fitted: DVector<f64>,
    /// RSS of the empty model followed by the RSS after each accepted predictor.
    pub rss_path: Vec<f64>,
    /// Set when the walk stopped at a candidate collinear with the current model.
    pub stopped_on_singular: bool,
}

/// Forward selection along `ranking` with a fresh cutoff table for `alpha`.
pub fn sequential_f_select(
    y: &DVector<f64>,
    z: &DMatrix<f64>,
    ranking: &[usize],
    alpha: f64,
) -> Result<ForwardSelectionResult> {
    let mut cutoffs = FCutoffTable::new(alpha, 1)?;
    sequential_f_select_with(y, z, ranking, &mut cutoffs)
}

/// Walks `ranking` in order. At step `i` (the candidate would be the `i`-th
/// predictor) the partial F statistic
/// `(RSS_{i-1} - RSS_i) / (RSS_i / (n - i))` is compared against the
/// `F(alpha; 1, n - i)` cutoff; the walk stops at the first rejection.
pub fn sequential_f_select_with(
    y: &DVector<f64>,
    z: &DMatrix<f64>,
    ranking: &[usize],
    cutoffs: &mut FCutoffTable,
) -> Result<ForwardSelectionResult> {
    let n = y.len();
    if z.nrows() != n {
        return Err(LargeError::Dimension(format!(
            "design has {} rows but response has {n}",
            z.nrows()
        )));
    }
    if let Some(&bad) = ranking.iter().find(|&&k| k >= z.ncols()) {
        return Err(LargeError::IndexOutOfRange {
            index: bad,
            dim: z.ncols(),
        });
    }
    // Residual sums below this are numerically an exact fit.
    let rss_floor = 1e-24 * y.norm_squared();

    let mut ols = IncrementalOls::new(y.clone());
    let mut support = Vec::new();
    let mut rss_path = vec![ols.rss()];
    let mut stopped_on_singular = false;

    for (step, &k) in ranking.iter().enumerate() {
        let i = step + 1;
        if i + 2 > n || ols.rss() <= rss_floor {
            break;
        }
        let cand = match ols.evaluate(z.column(k)) {
            Ok(c) => c,
            Err(LargeError::SingularDesign) => {
                stopped_on_singular = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let rss_prev = ols.rss();
        let rss_new = if cand.rss <= rss_floor { 0.0 } else { cand.rss };
        let reduction = rss_prev - rss_new;
        let df = n - i;
        let f = if rss_new > 0.0 {
            reduction / (rss_new / df as f64)
        } else if reduction > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if f > cutoffs.get(df) {
            ols.accept(cand);
            support.push(k);
            rss_path.push(rss_new);
        } else {
            break;
        }
    }

    let rss = if rss_path.last() == Some(&0.0) {
        0.0
    } else {
        ols.rss()
    };
    Ok(ForwardSelectionResult {
        sigma2_hat: rss / (n - support.len()) as f64,
        rss,
        fitted: ols.fitted(),
        support,
        rss_path,
        stopped_on_singular,
    })
}

fn population_sd(v: &DVector<f64>) -> f64 {
    let n = v.len() as f64;
    let mean = v.sum() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// Orders predictors by the standard deviation of their partial residuals
/// `r_k = y - sum_{l != k} Z_l beta_l`, largest first; ties go to the lower index.
pub fn rank_by_partial_residual_sd(
    y: &DVector<f64>,
    z: &DMatrix<f64>,
    beta: &DVector<f64>,
) -> Vec<usize> {
    let m = z.ncols();
    assert_eq!(beta.len(), m, "beta length must match design columns");
    let mut r = y.clone();
    for (k, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            r.axpy(-b, &z.column(k), 1.0);
        }
    }
    let base = population_sd(&r);
    let sds: Vec<f64> = (0..m)
        .map(|k| {
            let b = beta[k];
            if b == 0.0 {
                base
            } else {
                let mut rk = r.clone();
                rk.axpy(b, &z.column(k), 1.0);
                population_sd(&rk)
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        sds[b]
            .partial_cmp(&sds[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}
