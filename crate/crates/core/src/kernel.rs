//! Kernel evaluation and the matrix-free Kaczmarz solver for kernel ridge
//! regression.
//!
//! The solver works on the dual system `(K + λI) α = y` and only ever touches
//! `K` through pointwise evaluations `k(x_i, x_j)`. It keeps `s = K α` up to
//! date: a step on row `i` evaluates one kernel column (`n` evaluations) and
//! applies it to `s` immediately, so auxiliary storage stays `O(n)`.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::sampling::{RngState, Sampler};
use crate::solvers::RunConfig;
use crate::trace::{drive, ConvergenceTrace, IterativeSolver, Reference, StopRule};

/// Steps between exact recomputations of `s = K α`.
pub const S_REFRESH_EVERY: u64 = 1000;

/// A positive semi-definite kernel family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `⟨x, x'⟩`
    Linear,
    /// `exp(−γ ‖x − x'‖²)`
    Gaussian { gamma: f64 },
    /// `(⟨x, x'⟩ + offset)^degree`
    Polynomial { degree: u32, offset: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Gaussian { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            KernelSpec::Gaussian { gamma } => Err(Error::InvalidParameter(format!(
                "gaussian gamma must be > 0, got {gamma}"
            ))),
            KernelSpec::Polynomial { degree, offset } if degree >= 1 && offset >= 0.0 && offset.is_finite() => Ok(()),
            KernelSpec::Polynomial { degree, offset } => Err(Error::InvalidParameter(format!(
                "polynomial kernel needs degree >= 1 and offset >= 0, got {degree} and {offset}"
            ))),
        }
    }

    /// Depends only on `x − x'`.
    pub fn is_translation_invariant(&self) -> bool {
        matches!(self, KernelSpec::Gaussian { .. })
    }

    fn eval_pairs(&self, pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
        match *self {
            KernelSpec::Linear => pairs.map(|(a, b)| a * b).sum(),
            KernelSpec::Gaussian { gamma } => {
                let d2: f64 = pairs.map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::Polynomial { degree, offset } => {
                let ip: f64 = pairs.map(|(a, b)| a * b).sum();
                (ip + offset).powi(degree as i32)
            }
        }
    }

    pub fn eval(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        if x.len() != x2.len() {
            return Err(Error::Dimension(format!(
                "kernel arguments of length {} and {}",
                x.len(),
                x2.len()
            )));
        }
        Ok(self.eval_pairs(x.iter().copied().zip(x2.iter().copied())))
    }

    /// `k(a^i, b^j)` on rows of two point sets with the same dimension.
    pub fn eval_rows(&self, a: &DenseMatrix, i: usize, b: &DenseMatrix, j: usize) -> f64 {
        debug_assert_eq!(a.n_cols(), b.n_cols());
        self.eval_pairs(a.row(i).zip(b.row(j)))
    }

    fn eval_row_point(&self, a: &DenseMatrix, i: usize, x: &[f64]) -> f64 {
        self.eval_pairs(a.row(i).zip(x.iter().copied()))
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    spec.eval(x, x2)
}

/// `f(x) = Σ_i α_i k(x_i, x)`.
pub fn krr_predict(alpha: &[f64], points: &DenseMatrix, spec: &KernelSpec, x: &[f64]) -> Result<f64> {
    if alpha.len() != points.n_rows() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} points",
            alpha.len(),
            points.n_rows()
        )));
    }
    if x.len() != points.n_cols() {
        return Err(Error::Dimension(format!(
            "query of dimension {} against points of dimension {}",
            x.len(),
            points.n_cols()
        )));
    }
    Ok(alpha
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(i, a)| a * spec.eval_row_point(points, i, x))
        .sum())
}

/// Dual iterate of the kernel solver.
#[derive(Debug, Clone)]
pub struct KrrState {
    pub alpha: DenseVector,
    /// Maintained `K α`.
    pub s: DenseVector,
    pub iter: u64,
    pub rng: RngState,
    pub lambda: f64,
}

impl KrrState {
    pub fn new(n: usize, lambda: f64, seed: u64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            alpha: DenseVector::zeros(n),
            s: DenseVector::zeros(n),
            iter: 0,
            rng: RngState::new(seed),
            lambda,
        })
    }

    /// Recomputes `s = K α` from scratch.
    pub fn refresh(&mut self, points: &DenseMatrix, spec: &KernelSpec) {
        let n = points.n_rows();
        let s = self.s.as_mut_slice();
        s.fill(0.0);
        for (i, &a) in self.alpha.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, sj) in s.iter_mut().enumerate().take(n) {
                *sj += a * spec.eval_rows(points, j, points, i);
            }
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    Ok(())
}

/// One Kaczmarz step on row `row` of `(K + λI) α = y`.
///
/// `k_rr` is `k(x_row, x_row)`; the kernel column is produced by `column`
/// one entry at a time.
fn krr_update(state: &mut KrrState, y: &[f64], row: usize, k_rr: f64, mut column: impl FnMut(usize) -> f64) -> f64 {
    let lambda = state.lambda;
    let a_r = state.alpha[row];
    let delta = (y[row] - state.s[row] - lambda * a_r) / (k_rr + lambda);
    if delta != 0.0 {
        state.alpha.as_mut_slice()[row] = a_r + delta;
        for (j, sj) in state.s.as_mut_slice().iter_mut().enumerate() {
            *sj += delta * column(j);
        }
    }
    state.iter += 1;
    delta
}

/// One step on `row`, evaluating the kernel column on the fly.
pub fn krr_step(state: &mut KrrState, points: &DenseMatrix, y: &[f64], spec: &KernelSpec, row: usize) -> Result<f64> {
    let n = points.n_rows();
    if y.len() != n || state.alpha.len() != n {
        return Err(Error::Dimension(format!(
            "{n} points, {} observations, {} coefficients",
            y.len(),
            state.alpha.len()
        )));
    }
    if row >= n {
        return Err(Error::IndexOutOfRange { index: row, len: n });
    }
    let k_rr = spec.eval_rows(points, row, points, row);
    Ok(krr_update(state, y, row, k_rr, |j| {
        spec.eval_rows(points, j, points, row)
    }))
}

/// Bounded least-recently-used cache of kernel columns.
#[derive(Debug, Clone)]
struct ColumnCache {
    capacity: usize,
    columns: HashMap<usize, Vec<f64>>,
    order: VecDeque<usize>,
    hits: u64,
}

impl ColumnCache {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            columns: HashMap::with_capacity(capacity),
            order: VecDeque::with_capacity(capacity),
            hits: 0,
        }
    }

    fn get_or_insert(&mut self, row: usize, fill: impl FnOnce() -> Vec<f64>) -> &[f64] {
        if self.columns.contains_key(&row) {
            self.hits += 1;
            if let Some(pos) = self.order.iter().position(|&r| r == row) {
                self.order.remove(pos);
            }
        } else {
            if self.columns.len() == self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.columns.remove(&old);
                }
            }
            self.columns.insert(row, fill());
        }
        self.order.push_back(row);
        &self.columns[&row]
    }
}

/// Randomized Kaczmarz for kernel ridge regression.
#[derive(Debug, Clone)]
pub struct KernelKaczmarz<'a> {
    points: &'a DenseMatrix,
    y: &'a DenseVector,
    spec: KernelSpec,
    sampler: Sampler,
    diag: Vec<f64>,
    state: KrrState,
    cache: Option<ColumnCache>,
    last_row: Option<usize>,
}

impl<'a> KernelKaczmarz<'a> {
    /// Rows are drawn with probability proportional to `k(x_i, x_i) + λ`,
    /// which is exactly uniform for translation-invariant kernels.
    pub fn new(points: &'a DenseMatrix, y: &'a DenseVector, spec: KernelSpec, lambda: f64, seed: u64) -> Result<Self> {
        spec.validate()?;
        let n = points.n_rows();
        if y.len() != n {
            return Err(Error::Dimension(format!("{n} points but {} observations", y.len())));
        }
        let state = KrrState::new(n, lambda, seed)?;
        let diag: Vec<f64> = (0..n).map(|i| spec.eval_rows(points, i, points, i)).collect();
        let sampler = if spec.is_translation_invariant() {
            Sampler::Uniform(n)
        } else {
            let weights: Vec<f64> = diag.iter().map(|d| d + lambda).collect();
            Sampler::weighted(&weights)?
        };
        Ok(Self {
            points,
            y,
            spec,
            sampler,
            diag,
            state,
            cache: None,
            last_row: None,
        })
    }

    /// Keeps up to `capacity` kernel columns in memory; `0` disables caching.
    pub fn with_column_cache(mut self, capacity: usize) -> Self {
        self.cache = (capacity > 0).then(|| ColumnCache::new(capacity));
        self
    }

    pub fn state(&self) -> &KrrState {
        &self.state
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn last_row(&self) -> Option<usize> {
        self.last_row
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache.as_ref().map_or(0, |c| c.hits)
    }

    /// Applies one update on a chosen row.
    pub fn step_on(&mut self, row: usize) -> Result<f64> {
        let n = self.points.n_rows();
        if row >= n {
            return Err(Error::IndexOutOfRange { index: row, len: n });
        }
        let (points, spec) = (self.points, self.spec);
        let delta = match &mut self.cache {
            None => krr_update(&mut self.state, self.y, row, self.diag[row], |j| {
                spec.eval_rows(points, j, points, row)
            }),
            Some(cache) => {
                let col = cache.get_or_insert(row, || (0..n).map(|j| spec.eval_rows(points, j, points, row)).collect());
                krr_update(&mut self.state, self.y, row, self.diag[row], |j| col[j])
            }
        };
        self.last_row = Some(row);
        if self.state.iter.is_multiple_of(S_REFRESH_EVERY) {
            self.state.refresh(self.points, &self.spec);
        }
        Ok(delta)
    }

    /// `‖y − Kα − λα‖²` from a freshly recomputed `Kα`.
    pub fn dual_residual_sq(&mut self) -> f64 {
        self.state.refresh(self.points, &self.spec);
        let lambda = self.state.lambda;
        self.y
            .iter()
            .zip(self.state.s.iter())
            .zip(self.state.alpha.iter())
            .map(|((y, s), a)| {
                let r = y - s - lambda * a;
                r * r
            })
            .sum()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        krr_predict(&self.state.alpha, self.points, &self.spec, x)
    }
}

impl IterativeSolver for KernelKaczmarz<'_> {
    fn step(&mut self) -> Result<()> {
        let row = self.sampler.draw(&mut self.state.rng);
        self.step_on(row).map(|_| ())
    }

    fn iterations(&self) -> u64 {
        self.state.iter
    }

    fn estimate(&self) -> &DenseVector {
        &self.state.alpha
    }

    fn residual_sq(&mut self) -> f64 {
        self.dual_residual_sq()
    }

    fn epoch_len(&self) -> usize {
        self.points.n_rows()
    }
}

/// Runs the kernel solver from `α = 0`; `reference` supplies `α*` and the
/// `K + λI` energy norm.
pub fn krr_run(
    points: &DenseMatrix,
    y: &DenseVector,
    spec: KernelSpec,
    lambda: f64,
    config: &RunConfig,
    reference: &Reference,
) -> Result<ConvergenceTrace> {
    let mut solver = KernelKaczmarz::new(points, y, spec, lambda, config.seed)?;
    let rule = StopRule {
        max_iters: config.max_iters,
        checkpoint_every: config.checkpoint_every.unwrap_or(points.n_rows() as u64),
        tol_sq: Some(config.tol_sq),
        plateau: false,
    };
    drive(&mut solver, reference, &rule)
}
