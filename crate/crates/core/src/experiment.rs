//! Replicated simulation studies.
//!
//! Replication `r` of a study with seed `s` draws its graph, its sample and its
//! CV split from separate ChaCha streams derived from `(s, r)`, so results do
//! not depend on how replications are scheduled across threads.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::{sample_mvn, Family, GraphSpec};
use crate::error::{LargeError, Result};
use crate::matrix::{center_columns, sample_covariance, DataMatrix, PrecisionEstimate};
use crate::metrics::{auroc, rmse_off, roc_curve, support_metrics, RocCurve, SupportMetrics};
use crate::rng::{replication_stream, stream, Purpose};
use crate::solver::{fit_glasso, fit_large, lambda_grid, select_lambda_cv, SolverConfig};
use crate::stats::ols_fit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Also fit the cross-validated graphical lasso baseline.
    pub glasso: bool,
    pub cv_folds: usize,
    pub cv_grid: usize,
    /// Smallest grid value as a fraction of the largest.
    pub cv_ratio: f64,
    pub glasso_tol: f64,
    pub glasso_max_outer: usize,
}

impl SimulationConfig {
    pub fn new(family: Family, n: usize, p: usize, reps: usize, seed: u64) -> Self {
        SimulationConfig {
            family,
            n,
            p,
            reps,
            seed,
            solver: SolverConfig::default(),
            glasso: true,
            cv_folds: 5,
            cv_grid: 10,
            cv_ratio: 0.01,
            glasso_tol: 1e-4,
            glasso_max_outer: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub auroc: f64,
    pub rmse_off: f64,
    pub density: f64,
    pub converged: bool,
    pub sweeps: usize,
    /// Selected global penalty (graphical lasso only).
    pub lambda: Option<f64>,
    pub support: SupportMetrics,
    #[serde(skip)]
    pub roc: Option<RocCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub rep: usize,
    pub large: MethodOutcome,
    pub glasso_cv: Option<MethodOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub auroc_mean: f64,
    pub auroc_sd: f64,
    pub rmse_off_mean: f64,
    pub rmse_off_sd: f64,
    /// Mean estimated edge density.
    pub density: f64,
    pub converged: usize,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub large: MethodSummary,
    pub glasso_cv: Option<MethodSummary>,
    pub replications: Vec<ReplicationOutcome>,
}

impl SimulationReport {
    /// True when every fit of every method converged.
    pub fn all_converged(&self) -> bool {
        self.replications
            .iter()
            .all(|r| r.large.converged && r.glasso_cv.as_ref().is_none_or(|g| g.converged))
    }
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn summarize(outcomes: &[&MethodOutcome]) -> MethodSummary {
    let au: Vec<f64> = outcomes.iter().map(|o| o.auroc).collect();
    let rm: Vec<f64> = outcomes.iter().map(|o| o.rmse_off).collect();
    let de: Vec<f64> = outcomes.iter().map(|o| o.density).collect();
    let (auroc_mean, auroc_sd) = mean_sd(&au);
    let (rmse_off_mean, rmse_off_sd) = mean_sd(&rm);
    MethodSummary {
        auroc_mean,
        auroc_sd,
        rmse_off_mean,
        rmse_off_sd,
        density: mean_sd(&de).0,
        converged: outcomes.iter().filter(|o| o.converged).count(),
        reps: outcomes.len(),
    }
}

/// Graph and centered sample for one replication.
pub fn replication_data(cfg: &SimulationConfig, rep: usize) -> Result<(GraphSpec, DataMatrix)> {
    let graph = cfg.family.generate(
        cfg.p,
        &mut replication_stream(cfg.seed, rep as u64, Purpose::Graph),
    )?;
    let x = sample_mvn(
        &graph,
        cfg.n,
        &mut replication_stream(cfg.seed, rep as u64, Purpose::Sample),
    )?;
    Ok((graph, center_columns(&x)))
}

pub fn score(
    est: &PrecisionEstimate,
    truth: &GraphSpec,
    lambda: Option<f64>,
) -> Result<MethodOutcome> {
    let roc = roc_curve(&est.theta, truth)?;
    let support = support_metrics(&est.theta, truth)?;
    Ok(MethodOutcome {
        auroc: auroc(&roc),
        rmse_off: rmse_off(&est.theta, &truth.theta)?,
        density: support.density,
        converged: est.converged,
        sweeps: est.sweeps,
        lambda,
        support,
        roc: Some(roc),
    })
}

/// Cross-validated graphical lasso: pick the penalty by K-fold likelihood,
/// then refit on the full sample.
pub fn fit_glasso_cv(
    x: &DataMatrix,
    folds: usize,
    grid_points: usize,
    ratio: f64,
    tol: f64,
    max_outer: usize,
    seed: u64,
) -> Result<(PrecisionEstimate, f64)> {
    let s = sample_covariance(x)?;
    let grid = lambda_grid(&s, grid_points, ratio)?;
    let cv = select_lambda_cv(x, &grid, folds, seed)?;
    let est = fit_glasso(&s, cv.lambda, tol, max_outer)?;
    Ok((est, cv.lambda))
}

pub fn run_replication(cfg: &SimulationConfig, rep: usize) -> Result<ReplicationOutcome> {
    let (graph, x) = replication_data(cfg, rep)?;
    let large = score(&fit_large(&x, &cfg.solver)?, &graph, None)?;
    let glasso_cv = if cfg.glasso {
        let cv_seed: u64 =
            replication_stream(cfg.seed, rep as u64, Purpose::CrossValidation).random();
        let (est, lam) = fit_glasso_cv(
            &x,
            cfg.cv_folds,
            cfg.cv_grid,
            cfg.cv_ratio,
            cfg.glasso_tol,
            cfg.glasso_max_outer,
            cv_seed,
        )?;
        Some(score(&est, &graph, Some(lam))?)
    } else {
        None
    };
    Ok(ReplicationOutcome {
        rep,
        large,
        glasso_cv,
    })
}

/// Runs all replications (in parallel on the current rayon pool) and
/// aggregates them.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationReport> {
    if cfg.reps == 0 {
        return Err(LargeError::param("reps", "must be >= 1"));
    }
    cfg.solver.validate()?;
    let replications: Vec<ReplicationOutcome> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_replication(cfg, rep))
        .collect::<Result<_>>()?;
    let large = summarize(&replications.iter().map(|r| &r.large).collect::<Vec<_>>());
    let glasso_cv = if cfg.glasso {
        let g: Vec<&MethodOutcome> = replications
            .iter()
            .filter_map(|r| r.glasso_cv.as_ref())
            .collect();
        Some(summarize(&g))
    } else {
        None
    };
    Ok(SimulationReport {
        config: cfg.clone(),
        large,
        glasso_cv,
        replications,
    })
}

/// One ROC point per significance level: support of `fit_large` at each
/// `alpha` against the truth. Returns `(alpha, fpr, tpr)` rows.
pub fn alpha_sweep_roc(
    x: &DataMatrix,
    truth: &GraphSpec,
    alphas: &[f64],
    solver: &SolverConfig,
) -> Result<Vec<(f64, f64, f64)>> {
    alphas
        .iter()
        .map(|&alpha| {
            let est = fit_large(x, &solver.clone().with_alpha(alpha))?;
            let m = support_metrics(&est.theta, truth)?;
            Ok((alpha, m.fpr, m.tpr))
        })
        .collect()
}

/// Tridiagonal matrix with two sub-blocks of equal size: diagonal 10 and
/// neighbor coupling 3 in the first, diagonal 1 and coupling 0.3 in the
/// second. The sub-blocks are not linked to each other.
pub fn two_block_tridiagonal(p: usize) -> Result<GraphSpec> {
    if p < 4 {
        return Err(LargeError::param("p", "must be >= 4"));
    }
    let half = p / 2;
    let mut theta = DMatrix::zeros(p, p);
    for i in 0..p {
        let (d, c) = if i < half { (10.0, 3.0) } else { (1.0, 0.3) };
        theta[(i, i)] = d;
        let same_block = (i + 1 < half) || (i >= half && i + 1 < p);
        if same_block {
            theta[(i, i + 1)] = c;
            theta[(i + 1, i)] = c;
        }
    }
    GraphSpec::from_theta(Family::Custom, theta, [10.0, 1.0, 1.0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidingConfig {
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for GuidingConfig {
    fn default() -> Self {
        GuidingConfig {
            n: 200,
            p: 50,
            reps: 20,
            alpha: 0.02,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidingOutcome {
    /// Monitored node (0-based).
    pub node: usize,
    /// Per replication: MSE of OLS on the node's true neighbors.
    pub oracle_mse: Vec<f64>,
    /// Estimate from the first selected model of the first sweep.
    pub initial_guided: Vec<f64>,
    pub initial_unguided: Vec<f64>,
    /// Estimate at the end of the solve.
    pub final_guided: Vec<f64>,
    pub final_unguided: Vec<f64>,
    pub median_oracle: f64,
    pub median_initial_guided: f64,
    pub median_initial_unguided: f64,
    pub median_final_guided: f64,
    pub median_final_unguided: f64,
}

/// Noise-variance estimate of one node with and without correlation guiding,
/// against an OLS fit on the node's true neighbors, over seeded replications
/// of [`two_block_tridiagonal`] data.
pub fn guiding_experiment(cfg: &GuidingConfig) -> Result<GuidingOutcome> {
    let graph = two_block_tridiagonal(cfg.p)?;
    let node = stream(cfg.seed, u64::MAX).random_range(0..cfg.p);
    let neighbors: Vec<usize> = (0..cfg.p)
        .filter(|&k| k != node && graph.theta[(node, k)] != 0.0)
        .collect();
    let solver = SolverConfig::default().with_alpha(cfg.alpha);
    let unguided = SolverConfig {
        guiding: false,
        ..solver.clone()
    };

    let rows: Vec<[f64; 5]> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let x = sample_mvn(
                &graph,
                cfg.n,
                &mut replication_stream(cfg.seed, rep as u64, Purpose::Sample),
            )?;
            let x = center_columns(&x);
            let y: DVector<f64> = x.values().column(node).into_owned();
            let z = x.values().select_columns(neighbors.iter());
            let ols = ols_fit(&z, &y)?;
            let oracle = ols.rss / (cfg.n - neighbors.len()) as f64;
            let g = fit_large(&x, &solver)?;
            let u = fit_large(&x, &unguided)?;
            Ok([
                oracle,
                g.sigma2_initial[node],
                u.sigma2_initial[node],
                g.sigma2[node],
                u.sigma2[node],
            ])
        })
        .collect::<Result<_>>()?;

    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<f64>>();
    Ok(GuidingOutcome {
        node,
        median_oracle: median(&col(0)),
        median_initial_guided: median(&col(1)),
        median_initial_unguided: median(&col(2)),
        median_final_guided: median(&col(3)),
        median_final_unguided: median(&col(4)),
        oracle_mse: col(0),
        initial_guided: col(1),
        initial_unguided: col(2),
        final_guided: col(3),
        final_unguided: col(4),
    })
}
