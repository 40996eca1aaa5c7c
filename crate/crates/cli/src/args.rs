use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use large_core::dgp::Family;
use large_core::solver::{DiagReconstruction, GuidingScope, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "large",
    version,
    about = "Sparse precision matrix estimation with nodewise adaptive penalties"
)]
pub struct Cli {
    /// Worker threads for parallel replications.
    #[arg(long, global = true, env = "LARGE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Estimate a precision matrix from a CSV data file.
    Fit(FitArgs),
    /// Run a simulation study on one graph family.
    Simulate(SimulateArgs),
    /// Regress one column on the others with a self-tuning lasso.
    Autotune(AutotuneArgs),
    /// Generate a ground-truth graph (and optionally a sample).
    Dgp(DgpArgs),
    /// Re-run a command from a saved run_config.json.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Large,
    Glasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeArg {
    First,
    Every,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagRuleArg {
    Variance,
    StdDevSquared,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    /// F-test significance level.
    #[arg(long, default_value_t = 0.02)]
    pub alpha: f64,
    /// Outer tolerance on the relative change of W (default 0.005 for p <= 100, else 0.05).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub max_outer: usize,
    /// Rank by partial-residual spread from the start instead of by marginal correlation.
    #[arg(long)]
    pub no_guiding: bool,
    /// Sweeps in which the first inner iteration is guided.
    #[arg(long, value_enum, default_value_t = ScopeArg::First)]
    pub guiding_scope: ScopeArg,
    /// Penalize the diagonal as well.
    #[arg(long)]
    pub diag_penalty: bool,
    /// Diagonal rebuild under --diag-penalty.
    #[arg(long, value_enum, default_value_t = DiagRuleArg::Variance)]
    pub diag_rule: DiagRuleArg,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha,
            tol_outer: self.tol,
            max_outer: self.max_outer,
            diag_penalty: self.diag_penalty,
            guiding: !self.no_guiding,
            guiding_scope: match self.guiding_scope {
                ScopeArg::First => GuidingScope::FirstSweep,
                ScopeArg::Every => GuidingScope::EverySweep,
            },
            diag_reconstruction: match self.diag_rule {
                DiagRuleArg::Variance => DiagReconstruction::Variance,
                DiagRuleArg::StdDevSquared => DiagReconstruction::StdDevSquared,
            },
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Numeric CSV, one observation per row; a non-numeric first row is a header.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Estimator::Large)]
    pub estimator: Estimator,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Fixed penalty for --estimator glasso.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Folds for cross-validated glasso.
    #[arg(long)]
    pub cv: Option<usize>,
    /// Penalty grid size for cross-validation.
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
    /// Smallest grid value as a fraction of the largest.
    #[arg(long, default_value_t = 0.01)]
    pub grid_ratio: f64,
    /// Seed for the fold assignment; drawn and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the data as given (it must already be column-centered).
    #[arg(long)]
    pub no_center: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Drawn and recorded in summary.json when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Skip the cross-validated glasso baseline.
    #[arg(long)]
    pub no_glasso: bool,
    #[arg(long, default_value_t = 5)]
    pub cv: usize,
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
    /// Also trace an ROC over these F-test levels on replication 0.
    #[arg(long, value_delimiter = ',')]
    pub alpha_sweep: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AutotuneArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Zero-based index of the response column.
    #[arg(long)]
    pub target: usize,
    #[arg(long, default_value_t = 0.02)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long)]
    pub no_center: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DgpArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also draw this many observations into data.csv.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A run_config.json written by an earlier run.
    pub config: PathBuf,
    /// Output directory; defaults to the one recorded in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
