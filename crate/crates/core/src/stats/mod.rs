//! Classical statistics used by the self-tuning Lasso: F quantiles, ordinary
//! least squares and sequential F-test forward selection.

mod fdist;
mod ols;
mod selection;

pub use fdist::{f_cdf, f_quantile, f_sf, ln_gamma, regularized_incomplete_beta, FCutoffTable};
pub use ols::{ols_fit, IncrementalOls, OlsFit};
pub use selection::{
    rank_by_partial_residual_sd, sequential_f_select, sequential_f_select_with,
    ForwardSelectionResult,
};

/// Population variance `sum (v - mean)^2 / n`.
pub fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}
