use serde::{Deserialize, Serialize};

use crate::error::{LargeError, Result};

/// When correlation-based guiding replaces the partial-residual ranking in the
/// first inner iteration of a node update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidingScope {
    /// Only during the first outer sweep.
    FirstSweep,
    /// At the first inner iteration of every outer sweep.
    EverySweep,
}

/// Diagonal rebuild under diagonal penalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagReconstruction {
    /// `theta_jj = 1 / (sigma2_j + lambda_j)`.
    Variance,
    /// `theta_jj = (sigma_j + lambda_j)^-2`, with `sigma_j = sqrt(sigma2_j)`.
    StdDevSquared,
}

/// Source of the nodewise penalties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyMode {
    /// Learned per node: `lambda_j = lambda0_j * sigma2_j`, with `sigma2_j` from F-tests.
    Adaptive,
    /// Every node uses this fixed penalty and no variance updates run.
    Pinned(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// F-test significance level.
    pub alpha: f64,
    /// Relative Frobenius tolerance on `W` between sweeps. `None` picks
    /// 0.005 for `p <= 100` and 0.05 above.
    pub tol_outer: Option<f64>,
    pub max_outer: usize,
    pub tol_inner: f64,
    pub max_inner: usize,
    pub diag_penalty: bool,
    /// Ridge factor applied when `S` is numerically singular.
    pub ridge_eps: f64,
    pub guiding: bool,
    pub guiding_scope: GuidingScope,
    pub diag_reconstruction: DiagReconstruction,
    pub penalty: PenaltyMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 0.02,
            tol_outer: None,
            max_outer: 100,
            tol_inner: 1e-4,
            max_inner: 50,
            diag_penalty: false,
            ridge_eps: 1e-6,
            guiding: true,
            guiding_scope: GuidingScope::FirstSweep,
            diag_reconstruction: DiagReconstruction::Variance,
            penalty: PenaltyMode::Adaptive,
        }
    }
}

impl SolverConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// The outer tolerance actually used for a problem of dimension `p`.
    pub fn outer_tolerance(&self, p: usize) -> f64 {
        self.tol_outer
            .unwrap_or(if p <= 100 { 0.005 } else { 0.05 })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(LargeError::param(
                "alpha",
                format!("must lie in (0, 1), got {}", self.alpha),
            ));
        }
        if let Some(t) = self.tol_outer {
            if !(t > 0.0) {
                return Err(LargeError::param("tol_outer", "must be positive"));
            }
        }
        if !(self.tol_inner > 0.0) {
            return Err(LargeError::param("tol_inner", "must be positive"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(LargeError::param(
                "max_outer/max_inner",
                "must be at least 1",
            ));
        }
        if !(self.ridge_eps >= 0.0) {
            return Err(LargeError::param("ridge_eps", "must be non-negative"));
        }
        if let PenaltyMode::Pinned(l) = self.penalty {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(LargeError::param(
                    "lambda",
                    "pinned penalty must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }
}
