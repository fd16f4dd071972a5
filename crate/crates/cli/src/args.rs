use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "randiter",
    version,
    about = "Randomized iterative solvers: generate problems, run solvers, compare methods"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded random problem (X.mtx, y.vec, reference.vec, meta.toml).
    Generate(GenerateArgs),
    /// Run one solver on a problem directory and write its convergence trace.
    Solve(SolveArgs),
    /// Run several solvers on the same problem and write a summary table.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Consistent,
    Inconsistent,
    Underdetermined,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub regime: RegimeArg,
    /// Number of rows.
    pub n: usize,
    /// Number of columns.
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Norm of the residual component for inconsistent problems.
    #[arg(long, default_value_t = randiter::oracle::DEFAULT_NOISE_SCALE)]
    pub noise: f64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk,
    Rcd,
    RkRidge,
    RcdRidge,
    RkKrr,
}

impl MethodArg {
    pub fn name(self) -> &'static str {
        match self {
            MethodArg::Rk => "rk",
            MethodArg::Rcd => "rcd",
            MethodArg::RkRidge => "rk-ridge",
            MethodArg::RcdRidge => "rcd-ridge",
            MethodArg::RkKrr => "rk-krr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Gaussian,
    Poly,
}

/// Settings shared by `solve` and `compare`.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Maximum number of iterations per trial.
    #[arg(long, default_value_t = 10_000)]
    pub iters: u64,
    /// Stop once the residual norm falls to this value; 0 runs all iterations.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Regularization strength (ridge and kernel methods).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 1.0)]
    pub offset: f64,
    /// Iterations between checkpoints; one epoch by default.
    #[arg(long)]
    pub checkpoint_every: Option<u64>,
    /// Independent replicas with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Starting point for rk and rcd (one value per line); zero by default.
    #[arg(long)]
    pub beta0: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Directory written by `generate` (or any directory with X.mtx and y.vec).
    pub problem_dir: PathBuf,
    /// Trace CSV path. With --trials > 1 the mean trace goes next to it as <stem>_mean.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Repeat to compare several methods.
    #[arg(long = "method", value_enum, required = true)]
    pub methods: Vec<MethodArg>,
    pub problem_dir: PathBuf,
    /// Summary CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}
