use std::fs;
use std::path::{Path, PathBuf};

use large_core::autotune::{autotune_lasso, normalize_columns, AutotuneOptions};
use large_core::dgp::sample_mvn;
use large_core::experiment::{
    alpha_sweep_roc, replication_data, run_simulation, MethodSummary, SimulationConfig,
};
use large_core::metrics::RocCurve;
use large_core::rng::stream;
use large_core::solver::{lambda_grid, select_lambda_cv, CvResult};
use large_core::{
    center_columns, fit_glasso, fit_large, sample_covariance, DVector, DataMatrix,
    PrecisionEstimate,
};
use log::info;
use serde::Serialize;

use crate::args::{AutotuneArgs, Command, DgpArgs, Estimator, FitArgs, SimulateArgs};
use crate::error::CliError;
use crate::table::{
    edge_rows, read_table, write_json, write_matrix, write_records, write_with_header, Table,
};

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    /// Outputs were written but at least one solve hit its iteration limit.
    NotConverged,
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn load_data(path: &Path, no_center: bool) -> Result<(DataMatrix, Option<Vec<String>>), CliError> {
    let Table { header, values } = read_table(path)?;
    let x = DataMatrix::new(values)?;
    if x.n() <= 2 {
        return Err(CliError::Input(format!(
            "{}: need more than 2 rows",
            path.display()
        )));
    }
    x.check_nondegenerate()?;
    let x = if no_center { x } else { center_columns(&x) };
    if !x.is_centered() {
        return Err(CliError::Input(
            "data is not column-centered; drop --no-center to center on load".into(),
        ));
    }
    Ok((x, header))
}

fn draw_seed(seed: &mut Option<u64>) -> u64 {
    *seed.get_or_insert_with(rand::random)
}

/// Writes `run_config.json` so the run can be replayed.
fn save_config(dir: &Path, cmd: &Command) -> Result<(), CliError> {
    write_json(&dir.join("run_config.json"), cmd)
}

pub fn run(cmd: Command) -> Result<Status, CliError> {
    match cmd {
        Command::Fit(a) => fit(a),
        Command::Simulate(a) => simulate(a),
        Command::Autotune(a) => autotune(a),
        Command::Dgp(a) => dgp(a),
        Command::Replay(a) => {
            let text = fs::read_to_string(&a.config).map_err(|e| CliError::io(&a.config, e))?;
            let mut inner: Command = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", a.config.display())))?;
            if let Some(out) = a.out {
                set_out(&mut inner, out)?;
            }
            run(inner)
        }
    }
}

fn set_out(cmd: &mut Command, out: PathBuf) -> Result<(), CliError> {
    match cmd {
        Command::Fit(a) => a.out = out,
        Command::Simulate(a) => a.out = out,
        Command::Autotune(a) => a.out = out,
        Command::Dgp(a) => a.out = out,
        Command::Replay(_) => {
            return Err(CliError::Input(
                "a replay config cannot replay itself".into(),
            ))
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FitReport<'a> {
    estimator: &'static str,
    n: usize,
    p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    columns: Option<&'a [String]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    edges: usize,
    #[serde(flatten)]
    estimate: &'a PrecisionEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    cv: Option<CvResult>,
}

fn fit(mut a: FitArgs) -> Result<Status, CliError> {
    let (x, header) = load_data(&a.input, a.no_center)?;
    prepare_out(&a.out)?;
    let cfg = a.solver.config();
    let mut cv = None;
    let (est, name) = match a.estimator {
        Estimator::Large if a.lambda.is_some() || a.cv.is_some() => {
            return Err(CliError::Input(
                "--lambda and --cv apply to --estimator glasso".into(),
            ))
        }
        Estimator::Large if cfg.diag_penalty => (fit_large(&x, &cfg)?, "large_diag"),
        Estimator::Large => (fit_large(&x, &cfg)?, "large"),
        Estimator::Glasso => {
            let s = sample_covariance(&x)?;
            let tol = a.solver.tol.unwrap_or(1e-4);
            match (a.lambda, a.cv) {
                (Some(lam), None) => (fit_glasso(&s, lam, tol, a.solver.max_outer)?, "glasso"),
                (None, Some(k)) => {
                    let seed = draw_seed(&mut a.seed);
                    let grid = lambda_grid(&s, a.grid, a.grid_ratio)?;
                    let res = select_lambda_cv(&x, &grid, k, seed)?;
                    info!("cross-validation picked lambda {}", res.lambda);
                    let est = fit_glasso(&s, res.lambda, tol, a.solver.max_outer)?;
                    cv = Some(res);
                    (est, "glasso_cv")
                }
                _ => {
                    return Err(CliError::Input(
                        "--estimator glasso needs exactly one of --lambda or --cv".into(),
                    ))
                }
            }
        }
    };

    write_matrix(&a.out.join("theta.csv"), &est.theta)?;
    write_records(&a.out.join("edges.csv"), &edge_rows(&est))?;
    let report = FitReport {
        estimator: name,
        n: x.n(),
        p: x.p(),
        columns: header.as_deref(),
        seed: cv.as_ref().and(a.seed),
        edges: est.support.len(),
        estimate: &est,
        cv,
    };
    write_json(&a.out.join("fit.json"), &report)?;
    save_config(&a.out.clone(), &Command::Fit(a))?;
    Ok(if est.converged {
        Status::Done
    } else {
        Status::NotConverged
    })
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    family: &'static str,
    n: usize,
    p: usize,
    reps: usize,
    seed: u64,
    alpha: f64,
    large: &'a MethodSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    glasso_cv: Option<&'a MethodSummary>,
    all_converged: bool,
}

#[derive(Serialize)]
struct RepRow {
    rep: usize,
    method: &'static str,
    auroc: f64,
    rmse_off: f64,
    density: f64,
    tp: usize,
    fp: usize,
    tn: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    converged: bool,
    sweeps: usize,
    lambda: Option<f64>,
}

#[derive(Serialize)]
struct RocRow {
    threshold: f64,
    fpr: f64,
    tpr: f64,
}

#[derive(Serialize)]
struct AlphaRocRow {
    alpha: f64,
    fpr: f64,
    tpr: f64,
}

fn roc_rows(curve: &RocCurve) -> Vec<RocRow> {
    curve
        .points
        .iter()
        .zip(&curve.thresholds)
        .map(|(&(fpr, tpr), &threshold)| RocRow {
            threshold,
            fpr,
            tpr,
        })
        .collect()
}

fn simulate(mut a: SimulateArgs) -> Result<Status, CliError> {
    if a.reps == 0 {
        return Err(CliError::Input("--reps must be at least 1".into()));
    }
    let seed = draw_seed(&mut a.seed);
    prepare_out(&a.out)?;
    let mut cfg = SimulationConfig::new(a.family, a.n, a.p, a.reps, seed);
    cfg.solver = a.solver.config();
    cfg.glasso = !a.no_glasso;
    cfg.cv_folds = a.cv;
    cfg.cv_grid = a.grid;
    info!(
        "simulating {} reps of {} at n={} p={}",
        a.reps, a.family, a.n, a.p
    );
    let report = run_simulation(&cfg)?;

    let mut rows = Vec::new();
    for r in &report.replications {
        let methods = std::iter::once(("large", &r.large))
            .chain(r.glasso_cv.as_ref().map(|g| ("glasso_cv", g)));
        for (method, o) in methods {
            rows.push(RepRow {
                rep: r.rep,
                method,
                auroc: o.auroc,
                rmse_off: o.rmse_off,
                density: o.density,
                tp: o.support.tp,
                fp: o.support.fp,
                tn: o.support.tn,
                fn_: o.support.fn_,
                converged: o.converged,
                sweeps: o.sweeps,
                lambda: o.lambda,
            });
        }
    }
    write_records(&a.out.join("per_rep.csv"), &rows)?;

    let first = &report.replications[0];
    if let Some(roc) = &first.large.roc {
        write_records(&a.out.join("roc_rep0.csv"), &roc_rows(roc))?;
    }
    if let Some(roc) = first.glasso_cv.as_ref().and_then(|g| g.roc.as_ref()) {
        write_records(&a.out.join("roc_rep0_glasso_cv.csv"), &roc_rows(roc))?;
    }
    if let Some(alphas) = &a.alpha_sweep {
        let (graph, x) = replication_data(&cfg, 0)?;
        let rows: Vec<AlphaRocRow> = alpha_sweep_roc(&x, &graph, alphas, &cfg.solver)?
            .into_iter()
            .map(|(alpha, fpr, tpr)| AlphaRocRow { alpha, fpr, tpr })
            .collect();
        write_records(&a.out.join("roc_alpha_rep0.csv"), &rows)?;
    }

    let summary = SimulationSummary {
        family: a.family.name(),
        n: a.n,
        p: a.p,
        reps: a.reps,
        seed,
        alpha: a.solver.alpha,
        large: &report.large,
        glasso_cv: report.glasso_cv.as_ref(),
        all_converged: report.all_converged(),
    };
    write_json(&a.out.join("summary.json"), &summary)?;
    let converged = report.all_converged();
    save_config(&a.out.clone(), &Command::Simulate(a))?;
    Ok(if converged {
        Status::Done
    } else {
        Status::NotConverged
    })
}

#[derive(Serialize)]
struct AutotuneReport<'a> {
    target: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_name: Option<&'a str>,
    /// Predictor column index in the input for each coefficient.
    predictors: Vec<usize>,
    /// Coefficients in the units of the input columns.
    beta: Vec<f64>,
    /// Coefficients on the scaled design (`|Z_k|^2 = n`).
    beta_scaled: Vec<f64>,
    sigma2: f64,
    lambda0: f64,
    lambda: f64,
    /// Input column indices with nonzero coefficients.
    support: Vec<usize>,
    ftest_support: Vec<usize>,
    iterations: usize,
    converged: bool,
}

fn autotune(a: AutotuneArgs) -> Result<Status, CliError> {
    let (x, header) = load_data(&a.input, a.no_center)?;
    if a.target >= x.p() {
        return Err(CliError::Input(format!(
            "--target {} out of range for {} columns",
            a.target,
            x.p()
        )));
    }
    prepare_out(&a.out)?;
    let y: DVector<f64> = x.values().column(a.target).into_owned();
    let (z, factors) = normalize_columns(&x.without_column(a.target))?;
    let opts = AutotuneOptions {
        alpha: a.alpha,
        tol: a.tol,
        max_iter: a.max_iter,
        ..AutotuneOptions::default()
    };
    let fit = autotune_lasso(&y, &z, &opts)?;
    let predictors: Vec<usize> = (0..x.p()).filter(|&k| k != a.target).collect();
    let report = AutotuneReport {
        target: a.target,
        target_name: header.as_ref().map(|h| h[a.target].as_str()),
        beta: fit.beta.iter().zip(&factors).map(|(b, f)| b * f).collect(),
        beta_scaled: fit.beta.clone(),
        sigma2: fit.sigma2,
        lambda0: fit.lambda0,
        lambda: fit.lambda,
        support: fit.support.iter().map(|&k| predictors[k]).collect(),
        ftest_support: fit.ftest_support.iter().map(|&k| predictors[k]).collect(),
        predictors,
        iterations: fit.iterations,
        converged: fit.converged,
    };
    write_json(&a.out.join("autotune.json"), &report)?;
    save_config(&a.out.clone(), &Command::Autotune(a))?;
    Ok(if fit.converged {
        Status::Done
    } else {
        Status::NotConverged
    })
}

fn dgp(mut a: DgpArgs) -> Result<Status, CliError> {
    let seed = draw_seed(&mut a.seed);
    prepare_out(&a.out)?;
    let graph = a.family.generate(a.p, &mut stream(seed, 0))?;
    write_json(&a.out.join("graph.json"), &graph)?;
    write_matrix(&a.out.join("theta.csv"), &graph.theta)?;
    if let Some(n) = a.n {
        let x = sample_mvn(&graph, n, &mut stream(seed, 1))?;
        let header: Vec<String> = (0..a.p).map(|j| format!("x{j}")).collect();
        write_with_header(&a.out.join("data.csv"), &header, x.values())?;
    }
    save_config(&a.out.clone(), &Command::Dgp(a))?;
    Ok(Status::Done)
}
