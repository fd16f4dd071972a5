//! Reference values computed with nalgebra, independently of the crate's own
//! Cholesky and Jacobi routines.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use randiter::{DenseMatrix, DenseVector, KernelSpec};

pub fn mat(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.n_rows(), m.n_cols(), m.as_slice())
}

pub fn vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn dense(v: &DVector<f64>) -> DenseVector {
    DenseVector::new(v.as_slice().to_vec()).unwrap()
}

/// `(XᵀX)⁻¹Xᵀy` through an SVD least-squares solve.
pub fn least_squares(x: &DenseMatrix, y: &[f64]) -> DVector<f64> {
    mat(x).svd(true, true).solve(&vec(y), 1e-12).unwrap()
}

/// `X⁺y`, the minimum-norm solution.
pub fn min_norm(x: &DenseMatrix, y: &[f64]) -> DVector<f64> {
    mat(x).pseudo_inverse(1e-12).unwrap() * vec(y)
}

/// `(XᵀX + λI)⁻¹Xᵀy` through an LU solve.
pub fn ridge(x: &DenseMatrix, y: &[f64], lambda: f64) -> DVector<f64> {
    let xm = mat(x);
    let a = xm.transpose() * &xm + DMatrix::identity(x.n_cols(), x.n_cols()) * lambda;
    a.lu().solve(&(xm.transpose() * vec(y))).unwrap()
}

/// `(XXᵀ + λI)⁻¹y`.
pub fn ridge_dual(x: &DenseMatrix, y: &[f64], lambda: f64) -> DVector<f64> {
    let xm = mat(x);
    let a = &xm * xm.transpose() + DMatrix::identity(x.n_rows(), x.n_rows()) * lambda;
    a.lu().solve(&vec(y)).unwrap()
}

pub fn kernel(points: &DenseMatrix, spec: &KernelSpec) -> DMatrix<f64> {
    let n = points.n_rows();
    DMatrix::from_fn(n, n, |i, j| {
        spec.eval(&points.row_to_vec(i), &points.row_to_vec(j)).unwrap()
    })
}

/// `(K + λI)⁻¹y`.
pub fn krr(points: &DenseMatrix, y: &[f64], spec: &KernelSpec, lambda: f64) -> DVector<f64> {
    let n = points.n_rows();
    (kernel(points, spec) + DMatrix::identity(n, n) * lambda)
        .lu()
        .solve(&vec(y))
        .unwrap()
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `1 − λ_min/Tr` for a symmetric positive (semi)definite matrix; with
/// `positive_only`, `λ_min` is the smallest eigenvalue above `1e-8·λ_max`.
pub fn rate(m: &DMatrix<f64>, positive_only: bool) -> f64 {
    let ev = eigenvalues(m);
    let top = *ev.last().unwrap();
    let floor = if positive_only {
        *ev.iter().find(|&&e| e > 1e-8 * top).unwrap()
    } else {
        ev[0]
    };
    1.0 - floor / m.trace()
}

/// Orthonormal basis of `null(X)`: eigenvectors of `XᵀX` with eigenvalue
/// below `1e-10·λ_max`.
pub fn null_basis(x: &DenseMatrix) -> DMatrix<f64> {
    let xm = mat(x);
    let eig = (xm.transpose() * &xm).symmetric_eigen();
    let top = eig.eigenvalues.max();
    let cols: Vec<_> = (0..x.n_cols())
        .filter(|&j| eig.eigenvalues[j] <= 1e-10 * top)
        .map(|j| eig.eigenvectors.column(j).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}
