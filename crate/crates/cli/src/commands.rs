use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use randiter::harness::{epoch_contraction, mean_trace, run_trials};
use randiter::io::{fmt_real, read_matrix, read_vector, write_matrix, write_trace, write_vector};
use randiter::oracle::{self, RegimeInstance};
use randiter::{
    krr_run, rcd_ridge_run, rk_ridge_run, run, ColumnWeights, ConvergenceTrace, DenseVector, KernelSpec, Method,
    Problem, Reference, Regime, RunConfig, StopReason,
};

use crate::args::{CompareArgs, GenerateArgs, KernelArg, MethodArg, RegimeArg, RunArgs, SolveArgs};
use crate::error::{as_io, CliError};
use crate::meta::Meta;

pub const MATRIX_FILE: &str = "X.mtx";
pub const RHS_FILE: &str = "y.vec";
pub const REFERENCE_FILE: &str = "reference.vec";
pub const SUMMARY_HEADER: &str =
    "method,trials,iters_to_tol,final_err_sq,final_energy_err_sq,final_residual_sq,rate,epoch_rate,epoch_contraction";

pub fn generate(args: &GenerateArgs) -> Result<i32, CliError> {
    let (n, p) = (args.n, args.p);
    if !(args.noise.is_finite() && args.noise >= 0.0) {
        return Err(CliError::usage("--noise must be a finite value >= 0"));
    }
    let inst: RegimeInstance = match args.regime {
        RegimeArg::Consistent | RegimeArg::Inconsistent if !(p >= 1 && n > p) => {
            return Err(CliError::usage(format!("this regime needs N > P >= 1, got {n}x{p}")));
        }
        RegimeArg::Underdetermined if !(n >= 1 && p > n) => {
            return Err(CliError::usage(format!(
                "underdetermined needs P > N >= 1, got {n}x{p}"
            )));
        }
        RegimeArg::Consistent => oracle::gen_consistent(n, p, args.seed)?,
        RegimeArg::Inconsistent => oracle::gen_inconsistent(n, p, args.noise, args.seed)?,
        RegimeArg::Underdetermined => oracle::gen_underdetermined(n, p, args.seed)?,
    };

    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    write_matrix(&out.join(MATRIX_FILE), inst.problem.x())?;
    write_vector(&out.join(RHS_FILE), inst.problem.y())?;
    write_vector(&out.join(REFERENCE_FILE), &inst.reference)?;
    let inconsistent = args.regime == RegimeArg::Inconsistent;
    Meta {
        regime: regime_name(args.regime).into(),
        n,
        p,
        seed: args.seed,
        noise_scale: inconsistent.then_some(args.noise),
        z_norm: inst.noise.as_ref().map(|z| z.norm()),
    }
    .write(out)?;
    info!(
        "wrote {} problem {n}x{p} (seed {}) to {}",
        regime_name(args.regime),
        args.seed,
        out.display()
    );
    Ok(0)
}

fn regime_name(r: RegimeArg) -> &'static str {
    match r {
        RegimeArg::Consistent => "consistent",
        RegimeArg::Inconsistent => "inconsistent",
        RegimeArg::Underdetermined => "underdetermined",
    }
}

/// A problem directory read back from disk.
pub struct Loaded {
    pub problem: Problem,
    pub reference: Option<DenseVector>,
}

pub fn load(dir: &Path) -> Result<Loaded, CliError> {
    let x = read_matrix(&dir.join(MATRIX_FILE))?;
    let y = read_vector(&dir.join(RHS_FILE))?;
    let regime = Meta::read(dir)?.map_or(Regime::Unknown, |m| m.regime());
    let problem = Problem::new(x, y, regime).map_err(as_io)?;
    let ref_path = dir.join(REFERENCE_FILE);
    let reference = if ref_path.exists() {
        let r = read_vector(&ref_path)?;
        if r.len() != problem.p() {
            return Err(CliError::Io(format!(
                "{}: {} values for {} unknowns",
                ref_path.display(),
                r.len(),
                problem.p()
            )));
        }
        Some(r)
    } else {
        None
    };
    debug!("loaded {}x{} problem, regime {:?}", problem.n(), problem.p(), regime);
    Ok(Loaded { problem, reference })
}

fn kernel_spec(run: &RunArgs) -> Result<Option<KernelSpec>, CliError> {
    let spec = match run.kernel {
        None => return Ok(None),
        Some(KernelArg::Linear) => KernelSpec::Linear,
        Some(KernelArg::Gaussian) => KernelSpec::Gaussian { gamma: run.gamma },
        Some(KernelArg::Poly) => KernelSpec::Polynomial {
            degree: run.degree,
            offset: run.offset,
        },
    };
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(Some(spec))
}

fn check_run_args(run: &RunArgs) -> Result<(), CliError> {
    if run.iters == 0 {
        return Err(CliError::usage("--iters must be positive"));
    }
    if run.trials == 0 {
        return Err(CliError::usage("--trials must be positive"));
    }
    if !(run.tol.is_finite() && run.tol >= 0.0) {
        return Err(CliError::usage("--tol must be a finite value >= 0"));
    }
    if run.checkpoint_every == Some(0) {
        return Err(CliError::usage("--checkpoint-every must be positive"));
    }
    Ok(())
}

/// One method bound to a loaded problem, ready to run trials.
pub struct Plan<'a> {
    pub method: MethodArg,
    loaded: &'a Loaded,
    pub reference: Reference,
    lambda: f64,
    kernel: KernelSpec,
    config: RunConfig,
}

impl<'a> Plan<'a> {
    pub fn new(method: MethodArg, loaded: &'a Loaded, run: &RunArgs) -> Result<Self, CliError> {
        check_run_args(run)?;
        let kernel = kernel_spec(run)?;
        let (x, y) = (loaded.problem.x(), loaded.problem.y());

        let mut config = RunConfig::new(run.iters, run.seed).tol_sq(run.tol * run.tol);
        if let Some(every) = run.checkpoint_every {
            config = config.checkpoint_every(every);
        }

        let regularized = !matches!(method, MethodArg::Rk | MethodArg::Rcd);
        let lambda = match (regularized, run.lambda) {
            (true, None) => return Err(CliError::usage(format!("{} requires --lambda", method.name()))),
            (true, Some(l)) if !(l.is_finite() && l > 0.0) => {
                return Err(CliError::usage("--lambda must be a finite value > 0"));
            }
            (true, Some(l)) => l,
            (false, Some(_)) => {
                warn!("--lambda is ignored by {}", method.name());
                0.0
            }
            (false, None) => 0.0,
        };
        if method != MethodArg::RkKrr && kernel.is_some() {
            warn!("--kernel is ignored by {}", method.name());
        }
        if run.beta0.is_some() && regularized {
            return Err(CliError::usage(format!(
                "--beta0 is not supported by {}",
                method.name()
            )));
        }
        if let Some(path) = &run.beta0 {
            let b = read_vector(path)?;
            if b.len() != loaded.problem.p() {
                return Err(CliError::Io(format!(
                    "{}: {} values for {} unknowns",
                    path.display(),
                    b.len(),
                    loaded.problem.p()
                )));
            }
            config = config.beta0(b);
        }

        let reference = match method {
            MethodArg::Rk | MethodArg::Rcd => {
                let target = loaded.reference.clone().ok_or_else(|| {
                    CliError::Io(format!(
                        "{} needs {REFERENCE_FILE} in the problem directory",
                        method.name()
                    ))
                })?;
                oracle::basic_reference(basic(method), &loaded.problem, target)?
            }
            MethodArg::RkRidge => oracle::rk_ridge_reference(x, y, lambda)?,
            MethodArg::RcdRidge => oracle::rcd_ridge_reference(x, y, lambda)?,
            MethodArg::RkKrr => {
                let spec = kernel.ok_or_else(|| CliError::usage("rk-krr requires --kernel"))?;
                oracle::krr_reference(x, y, &spec, lambda)?
            }
        };
        debug!("{}: per-iteration rate {}", method.name(), reference.rate);
        Ok(Self {
            method,
            loaded,
            reference,
            lambda,
            kernel: kernel.unwrap_or(KernelSpec::Linear),
            config,
        })
    }

    pub fn trial(&self, seed: u64) -> randiter::Result<ConvergenceTrace> {
        let problem = &self.loaded.problem;
        let config = RunConfig {
            seed,
            ..self.config.clone()
        };
        let (x, y) = (problem.x(), problem.y());
        match self.method {
            MethodArg::Rk | MethodArg::Rcd => run(basic(self.method), problem, &config, &self.reference),
            MethodArg::RkRidge => rk_ridge_run(x, y, self.lambda, &config, &self.reference),
            MethodArg::RcdRidge => rcd_ridge_run(x, y, self.lambda, ColumnWeights::default(), &config, &self.reference),
            MethodArg::RkKrr => krr_run(x, y, self.kernel, self.lambda, &config, &self.reference),
        }
    }

    pub fn run_trials(&self, trials: usize) -> Result<Vec<ConvergenceTrace>, CliError> {
        Ok(run_trials(trials, self.config.seed, |seed| self.trial(seed))?)
    }

    /// Iterations per epoch: `n` for row methods, `p` for column methods.
    pub fn epoch(&self) -> usize {
        match self.method {
            MethodArg::Rcd | MethodArg::RcdRidge => self.loaded.problem.p(),
            _ => self.loaded.problem.n(),
        }
    }

    /// Whether failing to reach the tolerance counts as non-convergence.
    /// Ridge and kernel systems always have an exact solution; a zero
    /// tolerance asks for the full iteration budget instead.
    pub fn expects_convergence(&self) -> bool {
        if self.config.tol_sq == 0.0 {
            return false;
        }
        match self.method {
            MethodArg::Rk | MethodArg::Rcd => self.loaded.problem.regime().is_consistent(),
            _ => true,
        }
    }

    pub fn tol_sq(&self) -> f64 {
        self.config.tol_sq
    }
}

fn basic(method: MethodArg) -> Method {
    match method {
        MethodArg::Rcd => Method::Rcd,
        _ => Method::Rk,
    }
}

/// `<stem>_mean.csv` next to `out`.
pub fn mean_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "trace".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_mean.csv"))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

pub fn solve(args: &SolveArgs) -> Result<i32, CliError> {
    let loaded = load(&args.problem_dir)?;
    let plan = Plan::new(args.method, &loaded, &args.run)?;
    let traces = plan.run_trials(args.run.trials)?;
    ensure_parent(&args.out)?;
    write_trace(&args.out, &traces[0])?;

    let stop = if traces.len() > 1 {
        let mean = mean_trace(&traces)?;
        let path = mean_path(&args.out);
        write_trace(&path, &mean)?;
        info!("wrote mean of {} trials to {}", traces.len(), path.display());
        mean.stop
    } else {
        traces[0].stop
    };

    let last = traces[0].last();
    info!(
        "{}: {} iterations, err_sq {:e}, residual_sq {:e}, stop {:?}",
        plan.method.name(),
        last.iter,
        last.err_sq,
        last.residual_sq,
        stop
    );
    if plan.expects_convergence() && stop != StopReason::Converged {
        warn!(
            "{} did not reach the tolerance within {} iterations",
            plan.method.name(),
            args.run.iters
        );
        return Ok(crate::error::EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

/// One row of the comparison table, averaged over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: &'static str,
    pub trials: usize,
    /// Mean first checkpoint with `residual_sq <= tol²`; `None` if some trial never got there.
    pub iters_to_tol: Option<f64>,
    pub final_err_sq: f64,
    pub final_energy_err_sq: f64,
    pub final_residual_sq: f64,
    pub rate: f64,
    pub epoch_rate: f64,
    pub epoch_contraction: f64,
}

impl Summary {
    pub fn from_traces(plan: &Plan, traces: &[ConvergenceTrace]) -> Self {
        let k = traces.len() as f64;
        let mean = |f: &dyn Fn(&ConvergenceTrace) -> f64| traces.iter().map(f).sum::<f64>() / k;
        let tol_sq = plan.tol_sq();
        let hits: Option<Vec<f64>> = traces
            .iter()
            .map(|t| {
                t.records
                    .iter()
                    .find(|r| r.residual_sq <= tol_sq)
                    .map(|r| r.iter as f64)
            })
            .collect();
        let epoch = plan.epoch();
        let rate = plan.reference.rate;
        Self {
            method: plan.method.name(),
            trials: traces.len(),
            iters_to_tol: hits.map(|h| h.iter().sum::<f64>() / k),
            final_err_sq: mean(&|t| t.last().err_sq),
            final_energy_err_sq: mean(&|t| t.last().energy_err_sq),
            final_residual_sq: mean(&|t| t.last().residual_sq),
            rate,
            epoch_rate: rate.powi(epoch as i32),
            epoch_contraction: mean(&|t| epoch_contraction(t, plan.reference.bound_metric, epoch)),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.method,
            self.trials,
            self.iters_to_tol.map(fmt_real).unwrap_or_default(),
            fmt_real(self.final_err_sq),
            fmt_real(self.final_energy_err_sq),
            fmt_real(self.final_residual_sq),
            fmt_real(self.rate),
            fmt_real(self.epoch_rate),
            fmt_real(self.epoch_contraction),
        )
    }
}

pub fn compare(args: &CompareArgs) -> Result<i32, CliError> {
    let loaded = load(&args.problem_dir)?;
    let plans = args
        .methods
        .iter()
        .map(|&m| Plan::new(m, &loaded, &args.run))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for plan in &plans {
        let traces = plan.run_trials(args.run.trials)?;
        let summary = Summary::from_traces(plan, &traces);
        info!(
            "{}: contraction {:.4} per epoch (bound {:.4})",
            summary.method, summary.epoch_contraction, summary.epoch_rate
        );
        text.push_str(&summary.csv_row());
        text.push('\n');
    }
    ensure_parent(&args.out)?;
    fs::write(&args.out, text).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_path_sits_next_to_trace() {
        assert_eq!(
            mean_path(Path::new("out/trace.csv")),
            PathBuf::from("out/trace_mean.csv")
        );
        assert_eq!(mean_path(Path::new("run")), PathBuf::from("run_mean.csv"));
    }

    #[test]
    fn summary_row_layout() {
        let s = Summary {
            method: "rk",
            trials: 2,
            iters_to_tol: None,
            final_err_sq: 0.5,
            final_energy_err_sq: 1.0,
            final_residual_sq: 0.0,
            rate: 0.25,
            epoch_rate: 0.0625,
            epoch_contraction: 0.125,
        };
        assert_eq!(
            s.csv_row(),
            "rk,2,,5.0000000000000000e-1,1.0000000000000000e0,0.0000000000000000e0,\
             2.5000000000000000e-1,6.2500000000000000e-2,1.2500000000000000e-1"
        );
        assert_eq!(SUMMARY_HEADER.split(',').count(), s.csv_row().split(',').count());
    }
}
