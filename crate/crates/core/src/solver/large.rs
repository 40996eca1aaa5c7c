use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use super::config::{DiagReconstruction, GuidingScope, PenaltyMode, SolverConfig};
use super::{initial_working, relative_frobenius, write_offdiag};
use crate::autotune::relative_change;
use crate::error::{LargeError, Result};
use crate::matrix::{
    min_eigenvalue, partition, sample_covariance, skip_index, soft_threshold, support_of,
    symmetrize, CovarianceMatrix, DataMatrix, PrecisionEstimate,
};
use crate::stats::{rank_by_partial_residual_sd, sequential_f_select_with, FCutoffTable};

/// Working state of a LARGE solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeState {
    /// Working estimate of the covariance; diagonal fixed at `diag(S)` (+ ridge).
    pub w: DMatrix<f64>,
    /// Per-node regression coefficients on the other `p - 1` nodes.
    pub betas: Vec<DVector<f64>>,
    pub sigma2: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Last F-test support per node, as indices into the reduced `p - 1` space.
    pub support_sets: Vec<Vec<usize>>,
    pub sigma_flags: Vec<bool>,
    pub sweep: usize,
}

impl LargeState {
    /// `sigma2_j = S_jj`, `lambda0_j = max_{k != j} |S_jk| / (2 S_jj)`.
    fn initialize(s: &CovarianceMatrix, w: DMatrix<f64>, penalty: PenaltyMode) -> Self {
        let p = s.p();
        let sigma2: Vec<f64> = (0..p).map(|j| s.get(j, j)).collect();
        let lambda0: Vec<f64> = (0..p)
            .map(|j| {
                let max_cov = (0..p)
                    .filter(|&k| k != j)
                    .map(|k| s.get(j, k).abs())
                    .fold(0.0, f64::max);
                max_cov / (2.0 * s.get(j, j))
            })
            .collect();
        let lambda = match penalty {
            PenaltyMode::Adaptive => lambda0.iter().zip(&sigma2).map(|(l, s)| l * s).collect(),
            PenaltyMode::Pinned(l) => vec![l; p],
        };
        LargeState {
            w,
            betas: vec![DVector::zeros(p - 1); p],
            sigma2,
            lambda0,
            lambda,
            support_sets: vec![Vec::new(); p],
            sigma_flags: vec![true; p],
            sweep: 0,
        }
    }
}

/// Fits the nodewise-adaptive estimator to centered data.
pub fn fit_large(x: &DataMatrix, cfg: &SolverConfig) -> Result<PrecisionEstimate> {
    cfg.validate()?;
    x.check_nondegenerate()?;
    let s = sample_covariance(x)?;
    Solve::new(x, &s, cfg).run()
}

/// [`fit_large`] with the diagonal of the precision matrix penalized as well.
pub fn fit_large_diag(x: &DataMatrix, cfg: &SolverConfig) -> Result<PrecisionEstimate> {
    let cfg = SolverConfig {
        diag_penalty: true,
        ..cfg.clone()
    };
    fit_large(x, &cfg)
}

/// `|W_new - W_old|_F / |W_old|_F < e`.
pub fn check_convergence(w_new: &DMatrix<f64>, w_old: &DMatrix<f64>, e: f64) -> Result<bool> {
    if w_new.shape() != w_old.shape() {
        return Err(LargeError::Dimension("matrices differ in shape".into()));
    }
    if w_old.norm() == 0.0 {
        return Err(LargeError::param("w_old", "zero Frobenius norm"));
    }
    Ok(relative_frobenius(w_new, w_old) < e)
}

struct Solve<'a> {
    x: &'a DataMatrix,
    s: &'a CovarianceMatrix,
    cfg: &'a SolverConfig,
    state: LargeState,
    ridge: f64,
    sigma2_initial: Vec<f64>,
    /// `|Cor(X_j, X_k)|`.
    abs_cor: DMatrix<f64>,
    cutoffs: FCutoffTable,
}

impl<'a> Solve<'a> {
    fn new(x: &'a DataMatrix, s: &'a CovarianceMatrix, cfg: &'a SolverConfig) -> Self {
        let p = s.p();
        let (w, ridge) = initial_working(s, cfg.ridge_eps);
        let abs_cor = DMatrix::from_fn(p, p, |j, k| {
            (s.get(j, k) / (s.get(j, j) * s.get(k, k)).sqrt()).abs()
        });
        Solve {
            x,
            s,
            cfg,
            state: LargeState::initialize(s, w, cfg.penalty),
            ridge,
            sigma2_initial: (0..p).map(|j| s.get(j, j)).collect(),
            abs_cor,
            cutoffs: FCutoffTable::new(cfg.alpha, 1).expect("alpha validated"),
        }
    }

    fn run(mut self) -> Result<PrecisionEstimate> {
        let p = self.s.p();
        let e = self.cfg.outer_tolerance(p);
        let mut history = Vec::new();
        let mut converged = false;
        while self.state.sweep < self.cfg.max_outer {
            self.state.sweep += 1;
            let w_old = self.state.w.clone();
            for j in 0..p {
                self.update_node(j)?;
            }
            let rel = relative_frobenius(&self.state.w, &w_old);
            history.push(rel);
            if rel < e {
                converged = true;
                break;
            }
        }

        let st = &mut self.state;
        if let PenaltyMode::Pinned(_) = self.cfg.penalty {
            // Partial variance implied by the converged block: w_jj - w12' beta.
            for j in 0..p {
                let beta = &st.betas[j];
                let dot: f64 = (0..p - 1)
                    .map(|a| st.w[(skip_index(a, j), j)] * beta[a])
                    .sum();
                st.sigma2[j] = st.w[(j, j)] - dot;
            }
        }
        let mut est = reconstruct_theta(
            &st.w,
            &st.betas,
            &st.sigma2,
            self.cfg.diag_penalty,
            &st.lambda,
            self.cfg.diag_reconstruction,
        )?;
        est.converged = converged;
        est.sweeps = st.sweep;
        est.ridge = self.ridge;
        est.history = history;
        est.sigma2_initial = self.sigma2_initial;
        Ok(est)
    }

    fn guided_ranking(&self, j: usize) -> Vec<usize> {
        let p = self.s.p();
        let score = |a: usize| self.abs_cor[(j, skip_index(a, j))];
        let mut order: Vec<usize> = (0..p - 1).collect();
        order.sort_by(|&a, &b| {
            score(b)
                .partial_cmp(&score(a))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }

    fn update_node(&mut self, j: usize) -> Result<()> {
        let p = self.s.p();
        let m = p - 1;
        let cfg = self.cfg;
        let block = partition(&self.state.w, j)?;
        let v = &block.w11;
        let s12 = DVector::from_fn(m, |a, _| self.s.get(skip_index(a, j), j));
        let pen = if cfg.diag_penalty {
            DVector::from_fn(m, |a, _| self.state.lambda[skip_index(a, j)])
        } else {
            DVector::zeros(m)
        };

        let adaptive = matches!(cfg.penalty, PenaltyMode::Adaptive);
        let mut lam = match cfg.penalty {
            PenaltyMode::Adaptive => self.state.lambda0[j] * self.state.sigma2[j],
            PenaltyMode::Pinned(l) => l,
        };
        let guide =
            cfg.guiding && (self.state.sweep == 1 || cfg.guiding_scope == GuidingScope::EverySweep);
        let data = if adaptive {
            Some((
                self.x.values().column(j).into_owned(),
                self.x.without_column(j),
            ))
        } else {
            None
        };
        let sigma2_floor = f64::EPSILON * self.s.get(j, j);

        let mut beta = DVector::zeros(m);
        let mut vb = DVector::zeros(m);
        let mut ranking: Vec<usize> = (0..m).collect();
        let mut support: Vec<usize> = Vec::new();
        let mut flag = adaptive;

        for it in 1..=cfg.max_inner {
            let support_old = std::mem::take(&mut support);
            let beta_old = beta.clone();

            for &k in &ranking {
                let vkk = v[(k, k)];
                let old = beta[k];
                let g = s12[k] - (vb[k] - vkk * old);
                let new = soft_threshold(g, lam) / (vkk + pen[k]);
                if new != old {
                    vb.axpy(new - old, &v.column(k), 1.0);
                    beta[k] = new;
                }
            }

            if flag {
                let (y, z) = data.as_ref().expect("adaptive mode carries data");
                ranking = if it == 1 && guide {
                    self.guided_ranking(j)
                } else {
                    rank_by_partial_residual_sd(y, z, &beta)
                };
                let sel = sequential_f_select_with(y, z, &ranking, &mut self.cutoffs)?;
                support = sel.support;
                self.state.sigma2[j] = sel.sigma2_hat.max(sigma2_floor);
                if self.state.sweep == 1 && it == 1 {
                    self.sigma2_initial[j] = self.state.sigma2[j];
                }
                lam = self.state.lambda0[j] * self.state.sigma2[j];
                if support.iter().all(|k| support_old.contains(k)) {
                    flag = false;
                }
            } else {
                support = support_old;
            }

            log::trace!(
                "sweep {} node {j} iter {it}: lambda {lam:.4e} nnz {} support {:?} flag {flag}",
                self.state.sweep,
                beta.iter().filter(|b| **b != 0.0).count(),
                support
            );
            if relative_change(&beta, &beta_old, it == 1) < cfg.tol_inner {
                break;
            }
        }

        let mut w12 = v * &beta;
        if cfg.diag_penalty {
            w12 += pen.component_mul(&beta);
        }
        write_offdiag(&mut self.state.w, j, &w12);

        self.state.lambda[j] = lam;
        self.state.betas[j] = beta;
        self.state.support_sets[j] = support;
        self.state.sigma_flags[j] = flag;
        Ok(())
    }
}

/// Column-wise precision matrix before symmetrization:
/// `raw_jj = diag_j`, `raw_{-j, j} = -beta_j * diag_j`.
pub fn assemble_columns(betas: &[DVector<f64>], diag: &[f64]) -> DMatrix<f64> {
    let p = betas.len();
    let mut raw = DMatrix::zeros(p, p);
    for (j, beta) in betas.iter().enumerate() {
        raw[(j, j)] = diag[j];
        for a in 0..p - 1 {
            raw[(skip_index(a, j), j)] = -beta[a] * diag[j];
        }
    }
    raw
}

/// Builds the precision estimate from nodewise regressions:
/// `theta_jj = 1 / sigma2_j` and `theta_{-j,j} = -beta_j theta_jj`, then
/// symmetrized by averaging. Under diagonal penalization the diagonal follows
/// `rule`. Positive definiteness is checked and flagged, not enforced.
pub fn reconstruct_theta(
    w: &DMatrix<f64>,
    betas: &[DVector<f64>],
    sigma2: &[f64],
    diag_penalty: bool,
    lambda: &[f64],
    rule: DiagReconstruction,
) -> Result<PrecisionEstimate> {
    let p = betas.len();
    if sigma2.len() != p || lambda.len() != p || w.nrows() != p {
        return Err(LargeError::Dimension(
            "per-node vectors must have length p".into(),
        ));
    }
    if let Some(bad) = sigma2.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
        return Err(LargeError::param(
            "sigma2",
            format!("must be positive, got {bad}"),
        ));
    }
    let diag: Vec<f64> = (0..p)
        .map(|j| {
            if diag_penalty {
                match rule {
                    DiagReconstruction::Variance => 1.0 / (sigma2[j] + lambda[j]),
                    DiagReconstruction::StdDevSquared => (sigma2[j].sqrt() + lambda[j]).powi(-2),
                }
            } else {
                1.0 / sigma2[j]
            }
        })
        .collect();
    let theta = symmetrize(&assemble_columns(betas, &diag));
    let positive_definite = min_eigenvalue(&theta) > 0.0;
    Ok(PrecisionEstimate {
        support: support_of(&theta),
        theta,
        w: w.clone(),
        sigma2: sigma2.to_vec(),
        sigma2_initial: Vec::new(),
        lambda: lambda.to_vec(),
        converged: false,
        sweeps: 0,
        positive_definite,
        ridge: 0.0,
        history: Vec::new(),
    })
}
