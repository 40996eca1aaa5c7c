//! Self-tuning Lasso regression.
//!
//! Alternates cyclic coordinate descent on `beta` at penalty
//! `lambda = lambda0 * sigma2` with re-estimation of the noise variance
//! `sigma2`. By default `sigma2` is the mean squared error of an OLS model
//! built by sequential F-test forward selection over predictors ranked by
//! the spread of their partial residuals; the re-estimation stops once the
//! selected set no longer grows.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LargeError, Result};
use crate::matrix::soft_threshold;
use crate::stats::{rank_by_partial_residual_sd, sequential_f_select_with, variance, FCutoffTable};

/// How `sigma2` is re-estimated after each coordinate sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaRule {
    /// MSE of the F-test selected OLS model.
    FTest,
    /// Stationary point of the joint objective: `|y - Z beta|^2 / n`.
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutotuneOptions {
    pub alpha: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Disable to keep `sigma2` fixed at its initial value.
    pub sigma_update: bool,
    /// Initial `sigma2`; defaults to `Var(y)`.
    pub sigma2_init: Option<f64>,
    pub sigma_rule: SigmaRule,
}

impl Default for AutotuneOptions {
    fn default() -> Self {
        AutotuneOptions {
            alpha: 0.02,
            max_iter: 200,
            tol: 1e-4,
            sigma_update: true,
            sigma2_init: None,
            sigma_rule: SigmaRule::FTest,
        }
    }
}

/// Working state of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct AutotuneState {
    pub beta: DVector<f64>,
    pub sigma2: f64,
    pub lambda0: f64,
    pub support: Vec<usize>,
    pub ranking: Vec<usize>,
    pub sigma_update_flag: bool,
    /// `y - Z beta`, patched after every coordinate update.
    pub residual: DVector<f64>,
}

impl AutotuneState {
    pub fn new(y: &DVector<f64>, z: &DMatrix<f64>, opts: &AutotuneOptions) -> Result<Self> {
        let lambda0 = lambda0_init(y, z)?;
        let sigma2 = opts.sigma2_init.unwrap_or_else(|| variance(y.as_slice()));
        Ok(AutotuneState {
            beta: DVector::zeros(z.ncols()),
            sigma2,
            lambda0,
            support: Vec::new(),
            ranking: (0..z.ncols()).collect(),
            sigma_update_flag: opts.sigma_update,
            residual: y.clone(),
        })
    }

    /// Effective penalty `lambda0 * sigma2`.
    pub fn lambda(&self) -> f64 {
        self.lambda0 * self.sigma2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutotuneFit {
    pub beta: Vec<f64>,
    pub sigma2: f64,
    pub lambda0: f64,
    /// Final `lambda0 * sigma2`.
    pub lambda: f64,
    /// `{k : beta_k != 0}`.
    pub support: Vec<usize>,
    /// Predictors selected by the last F-test model. May differ from `support`.
    pub ftest_support: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// `sigma2` after each iteration.
    pub sigma2_trace: Vec<f64>,
}

/// `lambda0 = |Z'y / (2n)|_inf / Var(y)`.
pub fn lambda0_init(y: &DVector<f64>, z: &DMatrix<f64>) -> Result<f64> {
    let n = y.len();
    if z.nrows() != n {
        return Err(LargeError::Dimension(
            "design and response lengths differ".into(),
        ));
    }
    let var = variance(y.as_slice());
    if var <= 0.0 {
        return Err(LargeError::param("y", "degenerate column: zero variance"));
    }
    let max_ip = z
        .column_iter()
        .map(|c| (c.dot(y) / (2.0 * n as f64)).abs())
        .fold(0.0, f64::max);
    Ok(max_ip / var)
}

/// Scales each column to squared norm `n`. Returns the scaled design and the
/// per-column factors, so `beta_original = beta_scaled * factor`.
pub fn normalize_columns(z: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = z.nrows() as f64;
    let mut out = z.clone();
    let mut factors = Vec::with_capacity(z.ncols());
    for (k, mut col) in out.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(LargeError::DegenerateColumn(k));
        }
        let f = n.sqrt() / norm;
        col *= f;
        factors.push(f);
    }
    Ok((out, factors))
}

/// One pass of coordinate descent in `order`, assuming `|Z_k|^2 = n`.
pub fn cd_sweep(state: &mut AutotuneState, z: &DMatrix<f64>, order: &[usize]) {
    let n = z.nrows() as f64;
    let lam = state.lambda();
    for &k in order {
        let col = z.column(k);
        let old = state.beta[k];
        let new = soft_threshold(col.dot(&state.residual) / n + old, lam);
        if new != old {
            state.residual.axpy(old - new, &col, 1.0);
            state.beta[k] = new;
        }
    }
}

/// `(1/2) log sigma2 + |y - Z beta|^2 / (2 n sigma2) + lambda0 |beta|_1`.
pub fn objective(
    y: &DVector<f64>,
    z: &DMatrix<f64>,
    beta: &DVector<f64>,
    sigma2: f64,
    lambda0: f64,
) -> f64 {
    let n = y.len() as f64;
    let rss = (y - z * beta).norm_squared();
    0.5 * sigma2.ln() + rss / (2.0 * n * sigma2) + lambda0 * beta.lp_norm(1)
}

pub(crate) fn relative_change(new: &DVector<f64>, old: &DVector<f64>, first: bool) -> f64 {
    if first {
        return f64::INFINITY;
    }
    let diff = (new - old).lp_norm(1);
    let base = old.lp_norm(1);
    if base > 0.0 {
        diff / base
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|k| b.contains(k))
}

/// Runs the alternating solve. `z` must be column-normalized (`|Z_k|^2 = n`)
/// and `y` centered.
pub fn autotune_lasso(
    y: &DVector<f64>,
    z: &DMatrix<f64>,
    opts: &AutotuneOptions,
) -> Result<AutotuneFit> {
    let mut state = AutotuneState::new(y, z, opts)?;
    autotune_from_state(&mut state, y, z, opts)
}

/// Continues a solve from an explicit state.
pub fn autotune_from_state(
    state: &mut AutotuneState,
    y: &DVector<f64>,
    z: &DMatrix<f64>,
    opts: &AutotuneOptions,
) -> Result<AutotuneFit> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(LargeError::param("alpha", "must lie in (0, 1)"));
    }
    let n = y.len();
    let mut cutoffs = FCutoffTable::new(opts.alpha, 1)?;
    let mut converged = false;
    let mut iterations = 0;
    let mut trace = Vec::new();

    while iterations < opts.max_iter {
        iterations += 1;
        let support_old = state.support.clone();
        let beta_old = state.beta.clone();

        let order = state.ranking.clone();
        cd_sweep(state, z, &order);

        if state.sigma_update_flag {
            match opts.sigma_rule {
                SigmaRule::FTest => {
                    state.ranking = rank_by_partial_residual_sd(y, z, &state.beta);
                    let sel = sequential_f_select_with(y, z, &state.ranking, &mut cutoffs)?;
                    state.support = sel.support;
                    state.sigma2 = sel.sigma2_hat;
                    if is_subset(&state.support, &support_old) {
                        state.sigma_update_flag = false;
                    }
                }
                SigmaRule::Stationary => {
                    state.sigma2 = state.residual.norm_squared() / n as f64;
                }
            }
        }
        trace.push(state.sigma2);

        if relative_change(&state.beta, &beta_old, iterations == 1) < opts.tol {
            converged = true;
            break;
        }
    }

    let support = state
        .beta
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(k, _)| k)
        .collect();
    let mut ftest_support = state.support.clone();
    ftest_support.sort_unstable();
    Ok(AutotuneFit {
        beta: state.beta.as_slice().to_vec(),
        sigma2: state.sigma2,
        lambda0: state.lambda0,
        lambda: state.lambda(),
        support,
        ftest_support,
        iterations,
        converged,
        sigma2_trace: trace,
    })
}
