//! Multi-trial experiments: independently seeded runs in parallel, reduced to
//! a mean trace once every trial has finished.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::trace::{BoundMetric, ConvergenceTrace, StopReason, TraceRecord};

/// Runs `trial(seed)` for seeds `seed0, seed0 + 1, …` and returns the traces in
/// seed order.
pub fn run_trials<F>(trials: usize, seed0: u64, trial: F) -> Result<Vec<ConvergenceTrace>>
where
    F: Fn(u64) -> Result<ConvergenceTrace> + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|k| trial(seed0.wrapping_add(k)))
        .collect()
}

/// Entry-wise mean over the checkpoints every trace reached.
///
/// Traces must share a checkpoint schedule; the stop reason is `Converged`
/// only if every trial converged.
pub fn mean_trace(traces: &[ConvergenceTrace]) -> Result<ConvergenceTrace> {
    let len = traces
        .iter()
        .map(|t| t.records.len())
        .min()
        .ok_or_else(|| Error::InvalidParameter("no traces to average".into()))?;
    let k = traces.len() as f64;
    let mut records = Vec::with_capacity(len);
    for i in 0..len {
        let iter = traces[0].records[i].iter;
        if traces.iter().any(|t| t.records[i].iter != iter) {
            return Err(Error::InvalidParameter(format!("traces disagree on checkpoint {i}")));
        }
        let mean = |f: fn(&TraceRecord) -> f64| traces.iter().map(|t| f(&t.records[i])).sum::<f64>() / k;
        records.push(TraceRecord {
            iter,
            err_sq: mean(|r| r.err_sq),
            energy_err_sq: mean(|r| r.energy_err_sq),
            residual_sq: mean(|r| r.residual_sq),
            bound: mean(|r| r.bound),
        });
    }
    let stop = if traces.iter().all(|t| t.stop == StopReason::Converged) {
        StopReason::Converged
    } else if traces.iter().all(|t| t.stop == StopReason::Plateau) {
        StopReason::Plateau
    } else {
        StopReason::MaxIters
    };
    Ok(ConvergenceTrace { records, stop })
}

/// Geometric-mean contraction of `metric` per `epoch` iterations between the
/// first and last record.
pub fn epoch_contraction(trace: &ConvergenceTrace, metric: BoundMetric, epoch: usize) -> f64 {
    let pick = |r: &TraceRecord| match metric {
        BoundMetric::Euclidean => r.err_sq,
        BoundMetric::Energy => r.energy_err_sq,
    };
    let (first, last) = (trace.first(), trace.last());
    let epochs = (last.iter - first.iter) as f64 / epoch as f64;
    let (start, end) = (pick(first), pick(last));
    if epochs <= 0.0 || start <= 0.0 {
        return 1.0;
    }
    (end / start).powf(1.0 / epochs)
}
