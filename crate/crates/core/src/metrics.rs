//! Scoring an estimated precision matrix against the truth.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dgp::GraphSpec;
use crate::error::{LargeError, Result};

/// ROC curve of a threshold sweep over `|theta_hat_ij|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    /// Threshold of each point: pairs with score `>= threshold` are called
    /// edges. The anchors carry `+inf` and `-inf`.
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tpr: f64,
    pub fpr: f64,
    pub density: f64,
}

fn check_dims(theta_hat: &DMatrix<f64>, truth: &GraphSpec) -> Result<usize> {
    let p = truth.p();
    if theta_hat.shape() != (p, p) {
        return Err(LargeError::Dimension(format!(
            "estimate is {}x{}, truth is {p}x{p}",
            theta_hat.nrows(),
            theta_hat.ncols()
        )));
    }
    Ok(p)
}

/// Upper-triangle `(|theta_hat_ij|, is_edge)` pairs.
fn scored_pairs(theta_hat: &DMatrix<f64>, truth: &GraphSpec) -> Vec<(f64, bool)> {
    let p = truth.p();
    let mut out = Vec::with_capacity(p * (p - 1) / 2);
    for j in 1..p {
        for i in 0..j {
            out.push((theta_hat[(i, j)].abs(), truth.is_edge(i, j)));
        }
    }
    out
}

pub fn roc_curve(theta_hat: &DMatrix<f64>, truth: &GraphSpec) -> Result<RocCurve> {
    check_dims(theta_hat, truth)?;
    let mut pairs = scored_pairs(theta_hat, truth);
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let pos = pairs.iter().filter(|(_, e)| *e).count();
    let neg = pairs.len() - pos;
    let rate = |k: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            k as f64 / total as f64
        }
    };

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0, 0);
    let mut idx = 0;
    while idx < pairs.len() {
        let score = pairs[idx].0;
        while idx < pairs.len() && pairs[idx].0 == score {
            if pairs[idx].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        points.push((rate(fp, neg), rate(tp, pos)));
        thresholds.push(score);
    }
    points.push((1.0, 1.0));
    thresholds.push(f64::NEG_INFINITY);
    Ok(RocCurve { points, thresholds })
}

/// Trapezoidal area under the curve.
pub fn auroc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

/// `|offdiag(theta_hat - theta_true)|_F^2 / |offdiag(theta_true)|_F^2`.
pub fn rmse_off(theta_hat: &DMatrix<f64>, theta_true: &DMatrix<f64>) -> Result<f64> {
    if theta_hat.shape() != theta_true.shape() || !theta_true.is_square() {
        return Err(LargeError::Dimension(
            "matrices must be square and equal in shape".into(),
        ));
    }
    let p = theta_true.nrows();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..p {
        for i in 0..p {
            if i != j {
                let t = theta_true[(i, j)];
                num += (theta_hat[(i, j)] - t).powi(2);
                den += t * t;
            }
        }
    }
    if den == 0.0 {
        return Err(LargeError::UndefinedDenominator);
    }
    Ok(num / den)
}

/// Confusion counts over upper-triangle pairs, nonzero `theta_hat_ij` meaning
/// a predicted edge.
pub fn support_metrics(theta_hat: &DMatrix<f64>, truth: &GraphSpec) -> Result<SupportMetrics> {
    check_dims(theta_hat, truth)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (score, edge) in scored_pairs(theta_hat, truth) {
        match (score != 0.0, edge) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(SupportMetrics {
        tp,
        fp,
        tn,
        fn_,
        tpr: ratio(tp, tp + fn_),
        fpr: ratio(fp, fp + tn),
        density: ratio(tp + fp, tp + fp + tn + fn_),
    })
}
