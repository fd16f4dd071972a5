//! Randomized Kaczmarz (rows) and randomized coordinate descent (columns) for
//! `X β = y`.
//!
//! Kaczmarz projects β onto the hyperplane of one sampled equation, reading a
//! single row per step (`O(p)`). It keeps no residual vector; the trace
//! recomputes `y − Xβ` at checkpoints. Coordinate descent minimizes
//! `½‖y − Xβ‖²` along one sampled coordinate and keeps `r = y − Xβ` current at
//! `O(n)` per step, with an exact refresh every [`RESIDUAL_REFRESH_EVERY`]
//! steps.

use crate::error::{Error, Result};
use crate::linalg::{axpy, col_norms_sq, dot, matvec, row_norms_sq, DenseMatrix, DenseVector};
use crate::sampling::{RngState, Sampler};
use crate::trace::{drive, ConvergenceTrace, IterativeSolver, Reference, StopRule};

/// Coordinate-descent steps between exact residual recomputations.
pub const RESIDUAL_REFRESH_EVERY: u64 = 1000;

/// What is known about the solution set of `X β = y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    ConsistentUnique,
    Inconsistent,
    Underdetermined,
    Unknown,
}

impl Regime {
    /// Whether an exact solution exists, so the residual can reach zero.
    pub fn is_consistent(self) -> bool {
        matches!(self, Regime::ConsistentUnique | Regime::Underdetermined)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    x: DenseMatrix,
    y: DenseVector,
    regime: Regime,
}

impl Problem {
    pub fn new(x: DenseMatrix, y: DenseVector, regime: Regime) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(Error::Dimension(format!(
                "X has {} rows but y has length {}",
                x.n_rows(),
                y.len()
            )));
        }
        Ok(Self { x, y, regime })
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn y(&self) -> &DenseVector {
        &self.y
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn n(&self) -> usize {
        self.x.n_rows()
    }

    pub fn p(&self) -> usize {
        self.x.n_cols()
    }

    pub fn residual(&self, beta: &[f64]) -> Result<DenseVector> {
        self.y.sub(&matvec(&self.x, beta)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk,
    Rcd,
}

/// Settings shared by every solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_iters: u64,
    /// Early-stop threshold on the squared residual.
    pub tol_sq: f64,
    /// Defaults to one epoch.
    pub checkpoint_every: Option<u64>,
    pub seed: u64,
    /// Starting point; zero when absent.
    pub beta0: Option<DenseVector>,
}

impl RunConfig {
    pub fn new(max_iters: u64, seed: u64) -> Self {
        Self {
            max_iters,
            tol_sq: 0.0,
            checkpoint_every: None,
            seed,
            beta0: None,
        }
    }

    pub fn tol_sq(mut self, tol_sq: f64) -> Self {
        self.tol_sq = tol_sq;
        self
    }

    pub fn checkpoint_every(mut self, every: u64) -> Self {
        self.checkpoint_every = Some(every);
        self
    }

    pub fn beta0(mut self, beta0: DenseVector) -> Self {
        self.beta0 = Some(beta0);
        self
    }

    pub(crate) fn stop_rule(&self, regime: Regime, epoch: usize) -> StopRule {
        StopRule {
            max_iters: self.max_iters,
            checkpoint_every: self.checkpoint_every.unwrap_or(epoch as u64),
            tol_sq: (regime != Regime::Inconsistent).then_some(self.tol_sq),
            plateau: regime == Regime::Inconsistent,
        }
    }
}

/// Iterate of RK or RCD.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub beta: DenseVector,
    residual: DenseVector,
    residual_current: bool,
    pub iter: u64,
    pub rng: RngState,
}

impl SolverState {
    pub fn new(problem: &Problem, beta0: Option<DenseVector>, seed: u64) -> Result<Self> {
        let beta = match beta0 {
            Some(b) if b.len() != problem.p() => {
                return Err(Error::Dimension(format!(
                    "beta0 has length {} but X has {} columns",
                    b.len(),
                    problem.p()
                )))
            }
            Some(b) => b,
            None => DenseVector::zeros(problem.p()),
        };
        let residual = problem.residual(&beta)?;
        Ok(Self {
            beta,
            residual,
            residual_current: true,
            iter: 0,
            rng: RngState::new(seed),
        })
    }

    /// `y − Xβ`, recomputed if Kaczmarz steps have made it stale.
    pub fn residual(&mut self, x: &DenseMatrix, y: &DenseVector) -> Result<&DenseVector> {
        if !self.residual_current {
            self.refresh_residual(x, y)?;
        }
        Ok(&self.residual)
    }

    pub fn refresh_residual(&mut self, x: &DenseMatrix, y: &DenseVector) -> Result<()> {
        self.residual = y.sub(&matvec(x, &self.beta)?)?;
        self.residual_current = true;
        Ok(())
    }

    /// Kaczmarz projection onto row `row`. Returns the step size δ.
    pub fn rk_step(&mut self, x: &DenseMatrix, y: &DenseVector, row: usize) -> Result<f64> {
        check_index(row, x.n_rows())?;
        let norm_sq = x.row(row).map(|v| v * v).sum();
        self.rk_update(x, y, row, norm_sq)
    }

    fn rk_update(&mut self, x: &DenseMatrix, y: &DenseVector, row: usize, norm_sq: f64) -> Result<f64> {
        if norm_sq.is_nan() || norm_sq <= 0.0 {
            return Err(Error::ZeroNormRow(row));
        }
        let delta = (y[row] - x.row_dot(row, &self.beta)) / norm_sq;
        x.add_scaled_row(row, delta, self.beta.as_mut_slice());
        self.residual_current = false;
        self.iter += 1;
        Ok(delta)
    }

    /// Exact minimization along coordinate `col`. Returns the step size δ.
    pub fn rcd_step(&mut self, x: &DenseMatrix, y: &DenseVector, col: usize) -> Result<f64> {
        check_index(col, x.n_cols())?;
        let norm_sq = dot(x.col(col), x.col(col));
        self.rcd_update(x, y, col, norm_sq)
    }

    fn rcd_update(&mut self, x: &DenseMatrix, y: &DenseVector, col: usize, norm_sq: f64) -> Result<f64> {
        if norm_sq.is_nan() || norm_sq <= 0.0 {
            return Err(Error::ZeroNormColumn(col));
        }
        if !self.residual_current {
            self.refresh_residual(x, y)?;
        }
        let xc = x.col(col);
        let delta = dot(xc, &self.residual) / norm_sq;
        self.beta.as_mut_slice()[col] += delta;
        axpy(-delta, xc, self.residual.as_mut_slice());
        self.iter += 1;
        if self.iter.is_multiple_of(RESIDUAL_REFRESH_EVERY) {
            self.refresh_residual(x, y)?;
        }
        Ok(delta)
    }
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    Ok(())
}

/// Randomized Kaczmarz: rows drawn with probability `‖X^i‖² / ‖X‖_F²`.
#[derive(Debug, Clone)]
pub struct Kaczmarz<'a> {
    problem: &'a Problem,
    norms: DenseVector,
    sampler: Sampler,
    state: SolverState,
    last_row: Option<usize>,
}

impl<'a> Kaczmarz<'a> {
    pub fn new(problem: &'a Problem, beta0: Option<DenseVector>, seed: u64) -> Result<Self> {
        let norms = row_norms_sq(problem.x());
        let sampler = Sampler::weighted(&norms)?;
        Ok(Self {
            problem,
            norms,
            sampler,
            state: SolverState::new(problem, beta0, seed)?,
            last_row: None,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn last_row(&self) -> Option<usize> {
        self.last_row
    }

    pub fn step_on(&mut self, row: usize) -> Result<f64> {
        check_index(row, self.problem.n())?;
        let delta = self
            .state
            .rk_update(self.problem.x(), self.problem.y(), row, self.norms[row])?;
        self.last_row = Some(row);
        Ok(delta)
    }
}

impl IterativeSolver for Kaczmarz<'_> {
    fn step(&mut self) -> Result<()> {
        let row = self.sampler.draw(&mut self.state.rng);
        self.step_on(row).map(|_| ())
    }

    fn iterations(&self) -> u64 {
        self.state.iter
    }

    fn estimate(&self) -> &DenseVector {
        &self.state.beta
    }

    fn residual_sq(&mut self) -> f64 {
        self.state
            .residual(self.problem.x(), self.problem.y())
            .map(|r| r.norm_sq())
            .expect("dimensions checked at construction")
    }

    fn epoch_len(&self) -> usize {
        self.problem.n()
    }
}

/// Randomized coordinate descent: columns drawn with probability `‖X_j‖² / ‖X‖_F²`.
#[derive(Debug, Clone)]
pub struct CoordinateDescent<'a> {
    problem: &'a Problem,
    norms: DenseVector,
    sampler: Sampler,
    state: SolverState,
    last_col: Option<usize>,
}

impl<'a> CoordinateDescent<'a> {
    pub fn new(problem: &'a Problem, beta0: Option<DenseVector>, seed: u64) -> Result<Self> {
        let norms = col_norms_sq(problem.x());
        let sampler = Sampler::weighted(&norms)?;
        Ok(Self {
            problem,
            norms,
            sampler,
            state: SolverState::new(problem, beta0, seed)?,
            last_col: None,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn last_col(&self) -> Option<usize> {
        self.last_col
    }

    /// The maintained residual, without a refresh.
    pub fn maintained_residual(&self) -> &DenseVector {
        &self.state.residual
    }

    pub fn step_on(&mut self, col: usize) -> Result<f64> {
        check_index(col, self.problem.p())?;
        let delta = self
            .state
            .rcd_update(self.problem.x(), self.problem.y(), col, self.norms[col])?;
        self.last_col = Some(col);
        Ok(delta)
    }
}

impl IterativeSolver for CoordinateDescent<'_> {
    fn step(&mut self) -> Result<()> {
        let col = self.sampler.draw(&mut self.state.rng);
        self.step_on(col).map(|_| ())
    }

    fn iterations(&self) -> u64 {
        self.state.iter
    }

    fn estimate(&self) -> &DenseVector {
        &self.state.beta
    }

    fn residual_sq(&mut self) -> f64 {
        self.problem
            .residual(&self.state.beta)
            .map(|r| r.norm_sq())
            .expect("dimensions checked at construction")
    }

    fn epoch_len(&self) -> usize {
        self.problem.p()
    }
}

/// Runs RK or RCD on `problem` and records a convergence trace against `reference`.
pub fn run(method: Method, problem: &Problem, config: &RunConfig, reference: &Reference) -> Result<ConvergenceTrace> {
    match method {
        Method::Rk => {
            let mut solver = Kaczmarz::new(problem, config.beta0.clone(), config.seed)?;
            let rule = config.stop_rule(problem.regime(), problem.n());
            drive(&mut solver, reference, &rule)
        }
        Method::Rcd => {
            let mut solver = CoordinateDescent::new(problem, config.beta0.clone(), config.seed)?;
            let rule = config.stop_rule(problem.regime(), problem.p());
            drive(&mut solver, reference, &rule)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(rows: &[&[f64]], y: &[f64]) -> Problem {
        Problem::new(
            DenseMatrix::from_rows(rows).unwrap(),
            DenseVector::new(y.to_vec()).unwrap(),
            Regime::Unknown,
        )
        .unwrap()
    }

    #[test]
    fn rk_projects_onto_axis() {
        let p = problem(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 2.0]);
        let mut s = SolverState::new(&p, None, 0).unwrap();
        s.rk_step(p.x(), p.y(), 0).unwrap();
        assert_eq!(s.beta.as_slice(), &[1.0, 0.0]);
        assert_eq!(s.iter, 1);
    }

    #[test]
    fn rk_step_size() {
        let p = problem(&[&[3.0, 4.0]], &[10.0]);
        let mut s = SolverState::new(&p, None, 0).unwrap();
        let delta = s.rk_step(p.x(), p.y(), 0).unwrap();
        assert_eq!(delta, 0.4);
        assert!((s.beta[0] - 1.2).abs() < 1e-15 && (s.beta[1] - 1.6).abs() < 1e-15);
        assert!((p.x().row_dot(0, &s.beta) - 10.0).abs() <= 1e-10 * 11.0);
    }

    #[test]
    fn rcd_small_cases() {
        let p = problem(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 2.0]);
        let mut s = SolverState::new(&p, None, 0).unwrap();
        s.rcd_step(p.x(), p.y(), 0).unwrap();
        assert_eq!(s.beta.as_slice(), &[1.0, 0.0]);

        let p = problem(&[&[3.0], &[4.0]], &[10.0, 10.0]);
        let mut s = SolverState::new(&p, None, 0).unwrap();
        s.rcd_step(p.x(), p.y(), 0).unwrap();
        assert!((s.beta[0] - 2.8).abs() < 1e-15);
    }

    #[test]
    fn zero_norm_and_index_errors() {
        let p = problem(&[&[0.0, 0.0], &[1.0, 0.0]], &[1.0, 2.0]);
        let mut s = SolverState::new(&p, None, 0).unwrap();
        assert!(matches!(s.rk_step(p.x(), p.y(), 0), Err(Error::ZeroNormRow(0))));
        assert!(matches!(s.rcd_step(p.x(), p.y(), 1), Err(Error::ZeroNormColumn(1))));
        assert!(matches!(s.rk_step(p.x(), p.y(), 5), Err(Error::IndexOutOfRange { .. })));

        // The sampler never proposes the zero row.
        let mut rk = Kaczmarz::new(&p, None, 3).unwrap();
        for _ in 0..200 {
            rk.step().unwrap();
            assert_eq!(rk.last_row(), Some(1));
        }
    }

    #[test]
    fn all_zero_matrix_rejected() {
        let p = problem(&[&[0.0, 0.0]], &[1.0]);
        assert!(matches!(Kaczmarz::new(&p, None, 0), Err(Error::DegenerateWeights)));
        assert!(matches!(
            CoordinateDescent::new(&p, None, 0),
            Err(Error::DegenerateWeights)
        ));
    }

    #[test]
    fn mismatched_inputs() {
        assert!(Problem::new(
            DenseMatrix::identity(2).unwrap(),
            DenseVector::new(vec![1.0]).unwrap(),
            Regime::Unknown
        )
        .is_err());
        let p = problem(&[&[1.0, 0.0]], &[1.0]);
        assert!(SolverState::new(&p, Some(DenseVector::zeros(3)), 0).is_err());
    }

    #[test]
    fn rk_residual_is_lazy_but_exact() {
        let p = problem(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.5]], &[1.0, 0.0, 2.0]);
        let mut rk = Kaczmarz::new(&p, None, 5).unwrap();
        for _ in 0..17 {
            rk.step().unwrap();
        }
        let beta = rk.state().beta.clone();
        let expect = p.residual(&beta).unwrap().norm_sq();
        assert_eq!(rk.residual_sq(), expect);
    }

    #[test]
    fn rcd_residual_tracks_exact() {
        let p = problem(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.5]], &[1.0, 0.0, 2.0]);
        let mut cd = CoordinateDescent::new(&p, None, 5).unwrap();
        for _ in 0..2500 {
            cd.step().unwrap();
            let exact = p.residual(&cd.state().beta).unwrap();
            let kept = cd.maintained_residual();
            for i in 0..3 {
                assert!((exact[i] - kept[i]).abs() <= 1e-9 * (1.0 + p.y().norm_inf()));
            }
        }
    }
}
