//! Dense column-major storage and the handful of exact kernels the solvers and
//! the oracle need: norms, products, a Cholesky solve and a cyclic Jacobi
//! eigensolver.
//!
//! All arithmetic is `f64`. Matrices are stored column-major so a column is a
//! contiguous slice; rows are read with stride `n_rows`.

use std::ops::{Deref, Index};

use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm, relative to `‖A‖_F`, at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-12;
/// Hard cap on Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Symmetry tolerance, relative to `max(1, max |a_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-10;

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// A dense vector of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty);
        }
        check_finite(&data)?;
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        Self { data: vec![0.0; len] }
    }

    /// Standard basis vector `e_index`.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.data[index] = 1.0;
        v
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::new((0..len).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        check_len(self.len(), other.len(), "dot")?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// `self - other`.
    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        check_len(self.len(), other.len(), "sub")?;
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// `self + other`.
    pub fn add(&self, other: &DenseVector) -> Result<DenseVector> {
        check_len(self.len(), other.len(), "add")?;
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, a: f64) -> DenseVector {
        Self {
            data: self.data.iter().map(|v| a * v).collect(),
        }
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist_sq(&self, other: &DenseVector) -> Result<f64> {
        check_len(self.len(), other.len(), "dist_sq")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(data: Vec<f64>) -> Result<Self> {
        Self::new(data)
    }
}

/// A dense `n_rows × n_cols` matrix of finite `f64` values in column-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_col_major(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Empty);
        }
        if data.len() != n_rows * n_cols {
            return Err(Error::Dimension(format!(
                "{} values for a {n_rows}x{n_cols} matrix",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { n_rows, n_cols, data })
    }

    /// Builds a matrix from a list of equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != n_cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_fn(n_rows, n_cols, |i, j| rows[i].as_ref()[j])
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for j in 0..n_cols {
            for i in 0..n_rows {
                data.push(f(i, j));
            }
        }
        Self::from_col_major(n_rows, n_cols, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// Column-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n_rows + i]
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    /// Strided iterator over row `i`.
    pub fn row(&self, i: usize) -> impl ExactSizeIterator<Item = f64> + Clone + '_ {
        (0..self.n_cols).map(move |j| self.data[j * self.n_rows + i])
    }

    pub fn row_to_vec(&self, i: usize) -> Vec<f64> {
        self.row(i).collect()
    }

    /// `⟨X^i, v⟩` without copying the row.
    pub fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.n_cols);
        self.row(i).zip(v).map(|(a, b)| a * b).sum()
    }

    /// `out += a · X^i`.
    pub fn add_scaled_row(&self, i: usize, a: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_cols);
        for (o, x) in out.iter_mut().zip(self.row(i)) {
            *o += a * x;
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.n_rows {
            data.extend(self.row(i));
        }
        DenseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            data,
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij − a_ji|`; errors for non-square input.
    pub fn asymmetry(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        let n = self.n_rows;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        Ok(worst)
    }

    fn check_symmetric(&self) -> Result<()> {
        let asym = self.asymmetry()?;
        if asym > SYMMETRY_TOL * self.max_abs().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(())
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shifted(&self, shift: f64) -> Result<DenseMatrix> {
        let mut data = self.data.clone();
        for i in 0..self.n_rows.min(self.n_cols) {
            data[i * self.n_rows + i] += shift;
        }
        Self::from_col_major(self.n_rows, self.n_cols, data)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.n_rows + i]
    }
}

fn check_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{what}: lengths {a} and {b}")));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `‖X^i‖²` for every row.
pub fn row_norms_sq(x: &DenseMatrix) -> DenseVector {
    let mut out = vec![0.0; x.n_rows()];
    for j in 0..x.n_cols() {
        for (o, v) in out.iter_mut().zip(x.col(j)) {
            *o += v * v;
        }
    }
    DenseVector { data: out }
}

/// `‖X_j‖²` for every column.
pub fn col_norms_sq(x: &DenseMatrix) -> DenseVector {
    DenseVector {
        data: (0..x.n_cols()).map(|j| dot(x.col(j), x.col(j))).collect(),
    }
}

pub fn frobenius_sq(x: &DenseMatrix) -> f64 {
    dot(x.as_slice(), x.as_slice())
}

/// `X v`.
pub fn matvec(x: &DenseMatrix, v: &[f64]) -> Result<DenseVector> {
    check_len(x.n_cols(), v.len(), "matvec")?;
    let mut out = vec![0.0; x.n_rows()];
    for (j, vj) in v.iter().enumerate() {
        axpy(*vj, x.col(j), &mut out);
    }
    Ok(DenseVector { data: out })
}

/// `Xᵀ v`.
pub fn matvec_t(x: &DenseMatrix, v: &[f64]) -> Result<DenseVector> {
    check_len(x.n_rows(), v.len(), "matvec_t")?;
    Ok(DenseVector {
        data: (0..x.n_cols()).map(|j| dot(x.col(j), v)).collect(),
    })
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, column-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        a.check_symmetric()?;
        let n = a.n_rows();
        let max_diag = (0..n).map(|j| a.get(j, j).abs()).fold(0.0, f64::max);
        let floor = f64::EPSILON * n as f64 * max_diag;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[k * n + j] * l[k * n + j];
            }
            // Pivots lost to rounding count as zero.
            if d.is_nan() || d <= floor {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[k * n + i] * l[k * n + j];
                }
                l[j * n + i] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Result<DenseVector> {
        let n = self.n;
        check_len(n, b.len(), "cholesky solve")?;
        let mut x = b.to_vec();
        // L z = b
        for i in 0..n {
            let s: f64 = x[..i].iter().enumerate().map(|(k, xk)| self.l[k * n + i] * xk).sum();
            x[i] = (x[i] - s) / self.l[i * n + i];
        }
        // Lᵀ x = z; column i of L is contiguous.
        for i in (0..n).rev() {
            let s = dot(&self.l[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
            x[i] = (x[i] - s) / self.l[i * n + i];
        }
        DenseVector::new(x)
    }
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn solve_spd(a: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    Cholesky::new(a)?.solve(b)
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DenseVector,
    pub vectors: DenseMatrix,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigen-decomposition.
pub fn sym_eigen(a: &DenseMatrix) -> Result<SymEigen> {
    a.check_symmetric()?;
    let n = a.n_rows();
    // Work on the symmetrized copy so tiny input asymmetry cannot leak in.
    let mut m: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            0.5 * (a.get(i, j) + a.get(j, i))
        })
        .collect();
    let mut v: Vec<f64> = (0..n * n).map(|k| if k % n == k / n { 1.0 } else { 0.0 }).collect();

    let total = dot(&m, &m).sqrt();
    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    s += m[j * n + i] * m[j * n + i];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS && off_norm(&m) > JACOBI_TOL * total {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[q * n + p];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // M <- M P
                for k in 0..n {
                    let mkp = m[p * n + k];
                    let mkq = m[q * n + k];
                    m[p * n + k] = c * mkp - s * mkq;
                    m[q * n + k] = s * mkp + c * mkq;
                }
                // M <- Pᵀ M
                for k in 0..n {
                    let mpk = m[k * n + p];
                    let mqk = m[k * n + q];
                    m[k * n + p] = c * mpk - s * mqk;
                    m[k * n + q] = s * mpk + c * mqk;
                }
                m[q * n + p] = 0.0;
                m[p * n + q] = 0.0;
                // V <- V P
                for k in 0..n {
                    let vkp = v[p * n + k];
                    let vkq = v[q * n + k];
                    v[p * n + k] = c * vkp - s * vkq;
                    v[q * n + k] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend_from_slice(&v[i * n..(i + 1) * n]);
    }
    Ok(SymEigen {
        values: DenseVector::new(values)?,
        vectors: DenseMatrix::from_col_major(n, n, vectors)?,
        sweeps,
    })
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigs(a: &DenseMatrix) -> Result<DenseVector> {
    Ok(sym_eigen(a)?.values)
}

/// `vᵀ M v`, with tiny negative rounding clamped to zero.
pub fn energy_norm_sq(m: &DenseMatrix, v: &[f64]) -> Result<f64> {
    if !m.is_square() || m.n_cols() != v.len() {
        return Err(Error::Dimension(format!(
            "energy norm: {}x{} matrix with vector of length {}",
            m.n_rows(),
            m.n_cols(),
            v.len()
        )));
    }
    let mv = matvec(m, v)?;
    let value = dot(&mv, v);
    let scale = dot(v, v) * m.max_abs();
    if value < 0.0 && value >= -1e-12 * scale.max(1.0) {
        return Ok(0.0);
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, p: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    fn naive_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.n_rows(), b.n_cols(), |i, j| {
            let mut s = 0.0;
            for k in 0..a.n_cols() {
                s += a[(i, k)] * b[(k, j)];
            }
            s
        })
        .unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(DenseMatrix::from_col_major(0, 2, vec![]), Err(Error::Empty)));
        assert!(matches!(
            DenseMatrix::from_col_major(2, 2, vec![1.0; 3]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            DenseMatrix::from_col_major(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
        assert!(matches!(
            DenseVector::new(vec![f64::INFINITY]),
            Err(Error::NonFinite(0))
        ));
        assert!(matches!(DenseVector::new(vec![]), Err(Error::Empty)));
    }

    #[test]
    fn row_and_col_norms() {
        let i2 = DenseMatrix::identity(2).unwrap();
        assert_eq!(row_norms_sq(&i2).as_slice(), &[1.0, 1.0]);
        assert_eq!(col_norms_sq(&i2).as_slice(), &[1.0, 1.0]);

        let x = DenseMatrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        assert_eq!(row_norms_sq(&x).as_slice(), &[25.0, 0.0]);
        let x = DenseMatrix::from_rows(&[[3.0, 0.0], [4.0, 0.0]]).unwrap();
        assert_eq!(col_norms_sq(&x).as_slice(), &[25.0, 0.0]);
    }

    #[test]
    fn norms_match_summation_oracles() {
        let x = random_matrix(5, 3, 1);
        let rows = row_norms_sq(&x);
        for i in 0..5 {
            let mut s = 0.0;
            for j in 0..3 {
                s += x[(i, j)] * x[(i, j)];
            }
            assert!((rows[i] - s).abs() <= 1e-12);
        }
        let cols = col_norms_sq(&x);
        let via_t = row_norms_sq(&x.transpose());
        for j in 0..3 {
            assert!((cols[j] - via_t[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn frobenius() {
        assert_eq!(frobenius_sq(&DenseMatrix::identity(3).unwrap()), 3.0);
        assert_eq!(frobenius_sq(&DenseMatrix::from_rows(&[[3.0, 4.0]]).unwrap()), 25.0);
        let x = random_matrix(6, 4, 2);
        assert!((frobenius_sq(&x) - row_norms_sq(&x).sum()).abs() <= 1e-12);
    }

    #[test]
    fn matvec_small_cases() {
        let i2 = DenseMatrix::identity(2).unwrap();
        assert_eq!(matvec(&i2, &[3.0, 5.0]).unwrap().as_slice(), &[3.0, 5.0]);
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(matvec(&a, &[1.0, 1.0]).unwrap().as_slice(), &[3.0, 7.0]);
        assert_eq!(matvec_t(&a, &[1.0, 1.0]).unwrap().as_slice(), &[4.0, 6.0]);
        assert!(matches!(matvec(&a, &[1.0]), Err(Error::Dimension(_))));
        assert!(matches!(matvec_t(&a, &[1.0, 2.0, 3.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn matvec_matches_naive_loop() {
        for (n, p, seed) in [(4, 7, 3), (9, 2, 4), (1, 5, 5)] {
            let x = random_matrix(n, p, seed);
            let v = random_matrix(p, 1, seed + 100);
            let w = random_matrix(n, 1, seed + 200);
            let xv = matvec(&x, v.as_slice()).unwrap();
            let oracle = naive_mul(&x, &v);
            for i in 0..n {
                assert!((xv[i] - oracle[(i, 0)]).abs() <= 1e-12);
            }
            let xtw = matvec_t(&x, w.as_slice()).unwrap();
            let oracle = naive_mul(&x.transpose(), &w);
            for j in 0..p {
                assert!((xtw[j] - oracle[(j, 0)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn solve_spd_small_cases() {
        let i2 = DenseMatrix::identity(2).unwrap();
        assert_eq!(solve_spd(&i2, &[4.0, 5.0]).unwrap().as_slice(), &[4.0, 5.0]);
        let d = DenseMatrix::diag(&[2.0, 4.0]).unwrap();
        let x = solve_spd(&d, &[2.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() <= 1e-15 && (x[1] - 2.0).abs() <= 1e-15);
    }

    #[test]
    fn solve_spd_residual() {
        let m = random_matrix(8, 6, 9);
        let a = naive_mul(&m.transpose(), &m).shifted(0.1).unwrap();
        let b = random_matrix(6, 1, 10);
        let x = solve_spd(&a, b.as_slice()).unwrap();
        let ax = matvec(&a, &x).unwrap();
        let b_inf = b.max_abs();
        for i in 0..6 {
            assert!((ax[i] - b.as_slice()[i]).abs() <= 1e-8 * (1.0 + b_inf));
        }
    }

    #[test]
    fn solve_spd_errors() {
        let indefinite = DenseMatrix::diag(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            solve_spd(&indefinite, &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
        let asym = DenseMatrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap();
        assert!(matches!(solve_spd(&asym, &[1.0, 1.0]), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn eigs_small_cases() {
        let d = DenseMatrix::diag(&[4.0, 1.0]).unwrap();
        assert_eq!(sym_eigs(&d).unwrap().as_slice(), &[1.0, 4.0]);
        let a = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = sym_eigs(&a).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
        let asym = DenseMatrix::from_rows(&[[2.0, 1.0], [0.0, 2.0]]).unwrap();
        assert!(matches!(sym_eigs(&asym), Err(Error::NotSymmetric(_))));
    }

    /// Householder reflector `I − 2uuᵀ/‖u‖²` is orthogonal by construction.
    fn householder(u: &[f64]) -> DenseMatrix {
        let nu = dot(u, u);
        DenseMatrix::from_fn(u.len(), u.len(), |i, j| {
            (if i == j { 1.0 } else { 0.0 }) - 2.0 * u[i] * u[j] / nu
        })
        .unwrap()
    }

    #[test]
    fn eigs_recover_constructed_spectrum() {
        let d = [3.5, -1.0, 0.25, 7.0, 2.0, 0.0];
        let u1 = random_matrix(6, 1, 21);
        let u2 = random_matrix(6, 1, 22);
        let q = naive_mul(&householder(u1.as_slice()), &householder(u2.as_slice()));
        let a = naive_mul(&naive_mul(&q, &DenseMatrix::diag(&d).unwrap()), &q.transpose());
        // Symmetrize away rounding in the triple product.
        let a = DenseMatrix::from_fn(6, 6, |i, j| 0.5 * (a[(i, j)] + a[(j, i)])).unwrap();
        let eig = sym_eigen(&a).unwrap();
        let mut sorted = d.to_vec();
        sorted.sort_by(f64::total_cmp);
        for (got, want) in eig.values.iter().zip(&sorted) {
            assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
        }
        assert!((eig.values.sum() - a.trace()).abs() <= 1e-8 * a.trace().abs().max(1.0));
        // A v = λ v for every pair.
        for k in 0..6 {
            let v = eig.vectors.col(k);
            let av = matvec(&a, v).unwrap();
            for i in 0..6 {
                assert!((av[i] - eig.values[k] * v[i]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn energy_norm() {
        let i2 = DenseMatrix::identity(2).unwrap();
        assert_eq!(energy_norm_sq(&i2, &[3.0, 4.0]).unwrap(), 25.0);
        let d = DenseMatrix::diag(&[2.0, 0.0]).unwrap();
        assert_eq!(energy_norm_sq(&d, &[1.0, 1.0]).unwrap(), 2.0);
        assert!(matches!(energy_norm_sq(&d, &[1.0]), Err(Error::Dimension(_))));

        let m = random_matrix(7, 5, 31);
        let spd = naive_mul(&m.transpose(), &m);
        let v = random_matrix(5, 1, 32);
        let composed = dot(&matvec(&spd, v.as_slice()).unwrap(), v.as_slice());
        assert!((energy_norm_sq(&spd, v.as_slice()).unwrap() - composed).abs() <= 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn frobenius_equals_row_and_col_sums(
            n in 1usize..8, p in 1usize..8, seed in 0u64..1000
        ) {
            let x = random_matrix(n, p, seed);
            let f = frobenius_sq(&x);
            let tol = 1e-12 * f.max(1.0);
            proptest::prop_assert!((f - row_norms_sq(&x).sum()).abs() <= tol);
            proptest::prop_assert!((f - col_norms_sq(&x).sum()).abs() <= tol);
        }

        #[test]
        fn eigenvalue_sum_is_trace(n in 1usize..9, seed in 0u64..1000) {
            let m = random_matrix(n + 2, n, seed);
            let a = naive_mul(&m.transpose(), &m);
            let e = sym_eigs(&a).unwrap();
            for w in e.windows(2) {
                proptest::prop_assert!(w[0] <= w[1]);
            }
            proptest::prop_assert!((e.sum() - a.trace()).abs() <= 1e-8 * a.trace().max(1.0));
        }
    }
}
