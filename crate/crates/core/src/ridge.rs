//! Ridge regression, `min ‖y − Xβ‖² + λ‖β‖²`, without forming `XᵀX` or `XXᵀ`.
//!
//! [`RidgeKaczmarz`] is coordinate descent on the dual system
//! `(XXᵀ + λI) α = y`. It carries `β = Xᵀα` alongside α so a step reads one
//! row and costs `O(p)`. [`RidgeCoordinateDescent`] is coordinate descent on
//! the primal system `(XᵀX + λI) β = Xᵀy` with a maintained residual, `O(n)`
//! per step.

use crate::error::{Error, Result};
use crate::linalg::{axpy, col_norms_sq, dot, matvec, matvec_t, row_norms_sq, DenseMatrix, DenseVector};
use crate::sampling::{RngState, Sampler};
use crate::solvers::{RunConfig, RESIDUAL_REFRESH_EVERY};
use crate::trace::{drive, ConvergenceTrace, IterativeSolver, Reference, StopRule};

/// `S_a(z) = z / (1 + a)`.
pub fn shrink(a: f64, z: f64) -> f64 {
    debug_assert!(a >= 0.0);
    z / (1.0 + a)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ridge solvers need lambda > 0, got {lambda}"
        )));
    }
    Ok(())
}

fn check_shapes(x: &DenseMatrix, y: &DenseVector) -> Result<()> {
    if y.len() != x.n_rows() {
        return Err(Error::Dimension(format!(
            "X has {} rows but y has length {}",
            x.n_rows(),
            y.len()
        )));
    }
    Ok(())
}

/// Dual/primal pair of the Kaczmarz ridge solver.
#[derive(Debug, Clone)]
pub struct RidgeState {
    pub alpha: DenseVector,
    pub beta: DenseVector,
    pub iter: u64,
    pub rng: RngState,
    pub lambda: f64,
}

impl RidgeState {
    pub fn new(n: usize, p: usize, lambda: f64, seed: u64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            alpha: DenseVector::zeros(n),
            beta: DenseVector::zeros(p),
            iter: 0,
            rng: RngState::new(seed),
            lambda,
        })
    }

    /// Kaczmarz ridge step on `row`. Returns δ.
    pub fn rk_ridge_step(&mut self, x: &DenseMatrix, y: &DenseVector, row: usize) -> Result<f64> {
        if row >= x.n_rows() {
            return Err(Error::IndexOutOfRange {
                index: row,
                len: x.n_rows(),
            });
        }
        let norm_sq = x.row(row).map(|v| v * v).sum();
        Ok(self.rk_ridge_update(x, y, row, norm_sq))
    }

    fn rk_ridge_update(&mut self, x: &DenseMatrix, y: &DenseVector, row: usize, norm_sq: f64) -> f64 {
        let lambda = self.lambda;
        let delta = (y[row] - x.row_dot(row, &self.beta) - lambda * self.alpha[row]) / (norm_sq + lambda);
        self.alpha.as_mut_slice()[row] += delta;
        x.add_scaled_row(row, delta, self.beta.as_mut_slice());
        self.iter += 1;
        delta
    }
}

/// Kaczmarz-style ridge solver; rows drawn with probability ∝ `‖X^i‖² + λ`.
#[derive(Debug, Clone)]
pub struct RidgeKaczmarz<'a> {
    x: &'a DenseMatrix,
    y: &'a DenseVector,
    norms: DenseVector,
    sampler: Sampler,
    state: RidgeState,
    last_row: Option<usize>,
}

impl<'a> RidgeKaczmarz<'a> {
    pub fn new(x: &'a DenseMatrix, y: &'a DenseVector, lambda: f64, seed: u64) -> Result<Self> {
        check_shapes(x, y)?;
        let state = RidgeState::new(x.n_rows(), x.n_cols(), lambda, seed)?;
        // One pass over the data for the row norms; cached for the run.
        let norms = row_norms_sq(x);
        let weights: Vec<f64> = norms.iter().map(|v| v + lambda).collect();
        Ok(Self {
            x,
            y,
            norms,
            sampler: Sampler::weighted(&weights)?,
            state,
            last_row: None,
        })
    }

    pub fn state(&self) -> &RidgeState {
        &self.state
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn last_row(&self) -> Option<usize> {
        self.last_row
    }

    pub fn step_on(&mut self, row: usize) -> Result<f64> {
        if row >= self.x.n_rows() {
            return Err(Error::IndexOutOfRange {
                index: row,
                len: self.x.n_rows(),
            });
        }
        let delta = self.state.rk_ridge_update(self.x, self.y, row, self.norms[row]);
        self.last_row = Some(row);
        Ok(delta)
    }

    /// `‖y − Xβ − λα‖²`, the residual of the dual system when `β = Xᵀα`.
    pub fn dual_residual_sq(&self) -> f64 {
        let xb = matvec(self.x, &self.state.beta).expect("shapes checked");
        let lambda = self.state.lambda;
        self.y
            .iter()
            .zip(xb.iter())
            .zip(self.state.alpha.iter())
            .map(|((y, f), a)| {
                let r = y - f - lambda * a;
                r * r
            })
            .sum()
    }
}

impl IterativeSolver for RidgeKaczmarz<'_> {
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
        self.x.n_rows()
    }
}

/// Column sampling weights for the coordinate-descent ridge solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnWeights {
    /// `‖X_j‖² + λ`, the diagonal of `XᵀX + λI`.
    #[default]
    Shifted,
    /// `‖X_j‖²`.
    Plain,
}

/// Primal iterate and maintained residual of the coordinate-descent ridge solver.
#[derive(Debug, Clone)]
pub struct RcdRidgeState {
    pub beta: DenseVector,
    residual: DenseVector,
    pub iter: u64,
    pub rng: RngState,
    pub lambda: f64,
}

impl RcdRidgeState {
    pub fn new(x: &DenseMatrix, y: &DenseVector, lambda: f64, seed: u64) -> Result<Self> {
        check_lambda(lambda)?;
        check_shapes(x, y)?;
        Ok(Self {
            beta: DenseVector::zeros(x.n_cols()),
            residual: y.clone(),
            iter: 0,
            rng: RngState::new(seed),
            lambda,
        })
    }

    /// The maintained `y − Xβ`.
    pub fn residual(&self) -> &DenseVector {
        &self.residual
    }

    pub fn refresh_residual(&mut self, x: &DenseMatrix, y: &DenseVector) {
        self.residual = y
            .sub(&matvec(x, &self.beta).expect("shapes checked"))
            .expect("shapes checked");
    }

    /// Coordinate step with shrinkage on column `col`. Returns the change in β[col].
    pub fn rcd_ridge_step(&mut self, x: &DenseMatrix, y: &DenseVector, col: usize) -> Result<f64> {
        if col >= x.n_cols() {
            return Err(Error::IndexOutOfRange {
                index: col,
                len: x.n_cols(),
            });
        }
        let norm_sq = dot(x.col(col), x.col(col));
        Ok(self.rcd_ridge_update(x, y, col, norm_sq))
    }

    fn rcd_ridge_update(&mut self, x: &DenseMatrix, y: &DenseVector, col: usize, norm_sq: f64) -> f64 {
        let xc = x.col(col);
        let old = self.beta[col];
        let new = (norm_sq * old + dot(xc, &self.residual)) / (norm_sq + self.lambda);
        let delta = new - old;
        self.beta.as_mut_slice()[col] = new;
        axpy(-delta, xc, self.residual.as_mut_slice());
        self.iter += 1;
        if self.iter.is_multiple_of(RESIDUAL_REFRESH_EVERY) {
            self.refresh_residual(x, y);
        }
        delta
    }
}

/// Randomized coordinate descent for ridge regression.
#[derive(Debug, Clone)]
pub struct RidgeCoordinateDescent<'a> {
    x: &'a DenseMatrix,
    y: &'a DenseVector,
    norms: DenseVector,
    sampler: Sampler,
    state: RcdRidgeState,
    last_col: Option<usize>,
}

impl<'a> RidgeCoordinateDescent<'a> {
    pub fn new(x: &'a DenseMatrix, y: &'a DenseVector, lambda: f64, weights: ColumnWeights, seed: u64) -> Result<Self> {
        let state = RcdRidgeState::new(x, y, lambda, seed)?;
        let norms = col_norms_sq(x);
        let sampler = match weights {
            ColumnWeights::Shifted => {
                let w: Vec<f64> = norms.iter().map(|v| v + lambda).collect();
                Sampler::weighted(&w)?
            }
            ColumnWeights::Plain => Sampler::weighted(&norms)?,
        };
        Ok(Self {
            x,
            y,
            norms,
            sampler,
            state,
            last_col: None,
        })
    }

    pub fn state(&self) -> &RcdRidgeState {
        &self.state
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn last_col(&self) -> Option<usize> {
        self.last_col
    }

    pub fn step_on(&mut self, col: usize) -> Result<f64> {
        if col >= self.x.n_cols() {
            return Err(Error::IndexOutOfRange {
                index: col,
                len: self.x.n_cols(),
            });
        }
        let delta = self.state.rcd_ridge_update(self.x, self.y, col, self.norms[col]);
        self.last_col = Some(col);
        Ok(delta)
    }

    /// `‖Xᵀ(y − Xβ) − λβ‖²`, the residual of the primal normal equations.
    pub fn primal_residual_sq(&self) -> f64 {
        let r = self
            .y
            .sub(&matvec(self.x, &self.state.beta).expect("shapes checked"))
            .expect("shapes checked");
        let g = matvec_t(self.x, &r).expect("shapes checked");
        let lambda = self.state.lambda;
        g.iter()
            .zip(self.state.beta.iter())
            .map(|(g, b)| {
                let v = g - lambda * b;
                v * v
            })
            .sum()
    }
}

impl IterativeSolver for RidgeCoordinateDescent<'_> {
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
        self.primal_residual_sq()
    }

    fn epoch_len(&self) -> usize {
        self.x.n_cols()
    }
}

fn ridge_rule(config: &RunConfig, epoch: usize) -> StopRule {
    // A ridge system always has a unique exact solution.
    StopRule {
        max_iters: config.max_iters,
        checkpoint_every: config.checkpoint_every.unwrap_or(epoch as u64),
        tol_sq: Some(config.tol_sq),
        plateau: false,
    }
}

/// Kaczmarz ridge run; the trace measures α against `reference` (α* and the
/// `XXᵀ + λI` energy norm).
pub fn rk_ridge_run(
    x: &DenseMatrix,
    y: &DenseVector,
    lambda: f64,
    config: &RunConfig,
    reference: &Reference,
) -> Result<ConvergenceTrace> {
    let mut solver = RidgeKaczmarz::new(x, y, lambda, config.seed)?;
    drive(&mut solver, reference, &ridge_rule(config, x.n_rows()))
}

/// Coordinate-descent ridge run; the trace measures β against `reference`
/// (β_RR and the `XᵀX + λI` energy norm).
pub fn rcd_ridge_run(
    x: &DenseMatrix,
    y: &DenseVector,
    lambda: f64,
    weights: ColumnWeights,
    config: &RunConfig,
    reference: &Reference,
) -> Result<ConvergenceTrace> {
    let mut solver = RidgeCoordinateDescent::new(x, y, lambda, weights, config.seed)?;
    drive(&mut solver, reference, &ridge_rule(config, x.n_cols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_values() {
        assert_eq!(shrink(0.0, 3.7), 3.7);
        assert_eq!(shrink(1.0, 2.0), 1.0);
        assert!(shrink(0.3, -4.0).abs() <= 4.0);
    }

    #[test]
    fn one_by_one_fixed_point() {
        let x = DenseMatrix::from_rows(&[[1.0]]).unwrap();
        let y = DenseVector::new(vec![2.0]).unwrap();
        let mut s = RidgeState::new(1, 1, 1.0, 0).unwrap();
        assert_eq!(s.rk_ridge_step(&x, &y, 0).unwrap(), 1.0);
        assert_eq!((s.alpha[0], s.beta[0]), (1.0, 1.0));
        assert_eq!(s.rk_ridge_step(&x, &y, 0).unwrap(), 0.0);
        assert_eq!((s.alpha[0], s.beta[0]), (1.0, 1.0));
    }

    #[test]
    fn zero_correction_leaves_state() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        // α = (1, 0), β = Xᵀα = (1, 2); row 0: y₀ = ⟨β, X⁰⟩ + λα₀ = 5 + 0.5.
        let y = DenseVector::new(vec![5.5, 7.0]).unwrap();
        let mut s = RidgeState::new(2, 2, 0.5, 0).unwrap();
        s.alpha = DenseVector::new(vec![1.0, 0.0]).unwrap();
        s.beta = DenseVector::new(vec![1.0, 2.0]).unwrap();
        let before = (s.alpha.clone(), s.beta.clone());
        assert_eq!(s.rk_ridge_step(&x, &y, 0).unwrap(), 0.0);
        assert_eq!((s.alpha, s.beta), before);
    }

    #[test]
    fn rcd_ridge_diagonal_case() {
        let x = DenseMatrix::identity(2).unwrap();
        let y = DenseVector::new(vec![2.0, 2.0]).unwrap();
        let mut s = RcdRidgeState::new(&x, &y, 1.0, 0).unwrap();
        s.rcd_ridge_step(&x, &y, 0).unwrap();
        assert_eq!(s.beta.as_slice(), &[1.0, 0.0]);
        s.rcd_ridge_step(&x, &y, 1).unwrap();
        assert_eq!(s.beta.as_slice(), &[1.0, 1.0]);
        // At the optimum further steps are no-ops.
        assert_eq!(s.rcd_ridge_step(&x, &y, 0).unwrap(), 0.0);
    }

    #[test]
    fn rcd_ridge_zero_gradient_is_noop() {
        let x = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let y = DenseVector::new(vec![0.0, 3.0]).unwrap();
        let mut s = RcdRidgeState::new(&x, &y, 0.7, 0).unwrap();
        assert_eq!(s.rcd_ridge_step(&x, &y, 0).unwrap(), 0.0);
        assert_eq!(s.beta[0], 0.0);
    }

    #[test]
    fn zero_column_goes_to_zero() {
        let x = DenseMatrix::from_rows(&[[1.0, 0.0], [2.0, 0.0]]).unwrap();
        let y = DenseVector::new(vec![1.0, 1.0]).unwrap();
        let mut cd = RidgeCoordinateDescent::new(&x, &y, 0.1, ColumnWeights::Shifted, 1).unwrap();
        for _ in 0..200 {
            cd.step().unwrap();
        }
        assert_eq!(cd.state().beta[1], 0.0);
        assert!(matches!(
            RidgeCoordinateDescent::new(&x, &y, 0.1, ColumnWeights::Plain, 1).map(|c| c.sampler().probability(1)),
            Ok(p) if p == 0.0
        ));
    }

    #[test]
    fn lambda_must_be_positive() {
        let x = DenseMatrix::identity(2).unwrap();
        let y = DenseVector::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            RidgeKaczmarz::new(&x, &y, 0.0, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            RidgeCoordinateDescent::new(&x, &y, -1.0, ColumnWeights::Shifted, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    proptest::proptest! {
        /// The direct update and the shrinkage form agree.
        #[test]
        fn shrinkage_forms_agree(
            norm_sq in 0.01f64..50.0,
            lambda in 0.001f64..10.0,
            beta in -10.0f64..10.0,
            corr in -50.0f64..50.0,
        ) {
            let direct = (norm_sq * beta + corr) / (norm_sq + lambda);
            let shrunk = shrink(lambda / norm_sq, beta + corr / norm_sq);
            proptest::prop_assert!((direct - shrunk).abs() <= 1e-14 * (1.0 + direct.abs()));
        }
    }
}
