//! Convergence traces and the generic checkpointing driver.
//!
//! Every solver exposes one iterate (β for the primal methods, α for the dual
//! ones) through [`IterativeSolver`]. The driver compares it with a
//! [`Reference`] at checkpoints and records Euclidean error, energy-norm error,
//! the system residual and the theoretical bound `rate^t · e₀`.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{energy_norm_sq, DenseMatrix, DenseVector};

/// Consecutive checkpoints with tiny relative change that count as a plateau.
pub const PLATEAU_WINDOW: usize = 5;
/// Relative `err_sq` change below which a checkpoint counts toward a plateau.
pub const PLATEAU_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: u64,
    pub err_sq: f64,
    pub energy_err_sq: f64,
    pub residual_sq: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `residual_sq` fell to the tolerance.
    Converged,
    /// `err_sq` stopped changing.
    Plateau,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    pub stop: StopReason,
}

impl ConvergenceTrace {
    pub fn first(&self) -> &TraceRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }
}

/// Which error the theoretical bound applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMetric {
    Euclidean,
    Energy,
}

/// The matrix `M` of the energy norm `‖e‖²_M = eᵀMe`.
#[derive(Debug, Clone)]
pub enum EnergyNorm {
    Matrix(DenseMatrix),
    /// `K + shift·I` evaluated pointwise, never stored.
    Kernel {
        points: DenseMatrix,
        kernel: KernelSpec,
        shift: f64,
    },
}

impl EnergyNorm {
    pub fn norm_sq(&self, e: &[f64]) -> Result<f64> {
        match self {
            EnergyNorm::Matrix(m) => energy_norm_sq(m, e),
            EnergyNorm::Kernel { points, kernel, shift } => {
                let n = points.n_rows();
                if e.len() != n {
                    return Err(Error::Dimension(format!(
                        "energy norm over {n} points with vector of length {}",
                        e.len()
                    )));
                }
                let mut total = 0.0;
                for i in 0..n {
                    if e[i] == 0.0 {
                        continue;
                    }
                    let mut acc = kernel.eval_rows(points, i, points, i) * e[i];
                    for (j, ej) in e.iter().enumerate().skip(i + 1) {
                        acc += 2.0 * kernel.eval_rows(points, i, points, j) * ej;
                    }
                    total += e[i] * acc;
                }
                total += shift * crate::linalg::dot(e, e);
                Ok(total.max(0.0))
            }
        }
    }
}

/// Ground truth a run is measured against.
#[derive(Debug, Clone)]
pub struct Reference {
    pub target: DenseVector,
    pub energy: EnergyNorm,
    /// Per-iteration contraction factor of the bound.
    pub rate: f64,
    pub bound_metric: BoundMetric,
}

impl Reference {
    pub fn errors(&self, estimate: &DenseVector) -> Result<(f64, f64)> {
        let e = estimate.sub(&self.target)?;
        Ok((e.norm_sq(), self.energy.norm_sq(&e)?))
    }
}

/// When the driver checkpoints and stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_iters: u64,
    pub checkpoint_every: u64,
    /// Stop once `residual_sq <= tol_sq`.
    pub tol_sq: Option<f64>,
    pub plateau: bool,
}

/// A randomized method that can be stepped and inspected by the driver.
pub trait IterativeSolver {
    /// Draws an index and applies one update.
    fn step(&mut self) -> Result<()>;

    fn iterations(&self) -> u64;

    /// The vector compared with [`Reference::target`].
    fn estimate(&self) -> &DenseVector;

    /// Squared residual of the system being solved, recomputed exactly.
    fn residual_sq(&mut self) -> f64;

    /// Iterations per epoch (`n` for row methods, `p` for column methods).
    fn epoch_len(&self) -> usize;
}

/// Runs `solver` until the stop rule fires, checkpointing along the way.
pub fn drive<S: IterativeSolver + ?Sized>(
    solver: &mut S,
    reference: &Reference,
    rule: &StopRule,
) -> Result<ConvergenceTrace> {
    if rule.max_iters == 0 || rule.checkpoint_every == 0 {
        return Err(Error::InvalidParameter(
            "max_iters and checkpoint_every must be positive".into(),
        ));
    }
    let mut records = Vec::new();
    let checkpoint = |solver: &mut S, initial: Option<f64>| -> Result<TraceRecord> {
        let (err_sq, energy_err_sq) = reference.errors(solver.estimate())?;
        let residual_sq = solver.residual_sq();
        let iter = solver.iterations();
        let start = initial.unwrap_or(match reference.bound_metric {
            BoundMetric::Euclidean => err_sq,
            BoundMetric::Energy => energy_err_sq,
        });
        Ok(TraceRecord {
            iter,
            err_sq,
            energy_err_sq,
            residual_sq,
            bound: reference.rate.powf(iter as f64) * start,
        })
    };

    let first = checkpoint(solver, None)?;
    let initial = match reference.bound_metric {
        BoundMetric::Euclidean => first.err_sq,
        BoundMetric::Energy => first.energy_err_sq,
    };
    records.push(first);
    if rule.tol_sq.is_some_and(|tol| first.residual_sq <= tol) {
        return Ok(ConvergenceTrace {
            records,
            stop: StopReason::Converged,
        });
    }

    let mut flat = 0;
    let mut done = 0;
    while done < rule.max_iters {
        let chunk = rule.checkpoint_every.min(rule.max_iters - done);
        for _ in 0..chunk {
            solver.step()?;
        }
        done += chunk;
        let rec = checkpoint(solver, Some(initial))?;
        let prev = records.last().copied().expect("initial record present");
        records.push(rec);

        if rule.tol_sq.is_some_and(|tol| rec.residual_sq <= tol) {
            return Ok(ConvergenceTrace {
                records,
                stop: StopReason::Converged,
            });
        }
        if rule.plateau {
            let scale = prev.err_sq.max(f64::MIN_POSITIVE);
            if (rec.err_sq - prev.err_sq).abs() / scale < PLATEAU_RTOL {
                flat += 1;
            } else {
                flat = 0;
            }
            if flat >= PLATEAU_WINDOW {
                return Ok(ConvergenceTrace {
                    records,
                    stop: StopReason::Plateau,
                });
            }
        }
    }
    Ok(ConvergenceTrace {
        records,
        stop: StopReason::MaxIters,
    })
}
