//! Closed-form ground truth, theoretical rates and seeded problem generators.
//!
//! This is the only module that forms `XᵀX`, `XXᵀ` or a kernel matrix. It is
//! meant for desk-scale instances (a few thousand rows at most).

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{dot, matvec, matvec_t, solve_spd, sym_eigen, sym_eigs, Cholesky, DenseMatrix, DenseVector};
use crate::sampling::RngState;
use crate::solvers::{Method, Problem, Regime};
use crate::trace::{BoundMetric, EnergyNorm, Reference};

/// Eigenvalues at or below `RANK_TOL · ‖M‖₂` count as zero.
pub const RANK_TOL: f64 = 1e-8;
/// Generated matrices must have smallest singular value above this.
pub const MIN_SINGULAR_VALUE: f64 = 1e-8;
/// Regeneration attempts before a generator gives up.
pub const MAX_GENERATION_ATTEMPTS: usize = 10;
/// Agreement required between the two closed forms of the ridge solution.
pub const RIDGE_FORM_TOL: f64 = 1e-8;
pub const DEFAULT_NOISE_SCALE: f64 = 0.5;

/// `XᵀX`.
pub fn covariance(x: &DenseMatrix) -> DenseMatrix {
    let p = x.n_cols();
    let mut data = vec![0.0; p * p];
    for j in 0..p {
        for i in 0..=j {
            let v = dot(x.col(i), x.col(j));
            data[j * p + i] = v;
            data[i * p + j] = v;
        }
    }
    DenseMatrix::from_col_major(p, p, data).expect("finite products")
}

/// `XXᵀ`.
pub fn gram(x: &DenseMatrix) -> DenseMatrix {
    covariance(&x.transpose())
}

/// `K_ij = k(x_i, x_j)` over the rows of `points`.
pub fn kernel_matrix(points: &DenseMatrix, spec: &KernelSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let n = points.n_rows();
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..=j {
            let v = spec.eval_rows(points, i, points, j);
            data[j * n + i] = v;
            data[i * n + j] = v;
        }
    }
    DenseMatrix::from_col_major(n, n, data)
}

/// `β_LS = (XᵀX)⁻¹ Xᵀ y`.
pub fn ls_solution(x: &DenseMatrix, y: &[f64]) -> Result<DenseVector> {
    solve_spd(&covariance(x), &matvec_t(x, y)?)
}

/// `β_MN = Xᵀ (XXᵀ)⁻¹ y`.
pub fn min_norm_solution(x: &DenseMatrix, y: &[f64]) -> Result<DenseVector> {
    let a = solve_spd(&gram(x), y)?;
    matvec_t(x, &a)
}

/// `α = (XXᵀ + λI)⁻¹ y`, the dual ridge solution.
pub fn ridge_dual_solution(x: &DenseMatrix, y: &[f64], lambda: f64) -> Result<DenseVector> {
    check_lambda(lambda)?;
    solve_spd(&gram(x).shifted(lambda)?, y)
}

/// `β_RR`, computed through both `(XᵀX + λI)⁻¹Xᵀy` and `Xᵀ(XXᵀ + λI)⁻¹y`.
/// Fails if the two disagree.
pub fn ridge_solution(x: &DenseMatrix, y: &[f64], lambda: f64) -> Result<DenseVector> {
    check_lambda(lambda)?;
    let primal = solve_spd(&covariance(x).shifted(lambda)?, &matvec_t(x, y)?)?;
    let dual = matvec_t(x, &ridge_dual_solution(x, y, lambda)?)?;
    let gap = primal.sub(&dual)?.norm_inf();
    if gap > RIDGE_FORM_TOL * (1.0 + primal.norm_inf()) {
        return Err(Error::OracleInconsistency(gap));
    }
    Ok(primal)
}

/// `α* = (K + λI)⁻¹ y`.
pub fn krr_alpha_star(points: &DenseMatrix, y: &[f64], spec: &KernelSpec, lambda: f64) -> Result<DenseVector> {
    check_lambda(lambda)?;
    solve_spd(&kernel_matrix(points, spec)?.shifted(lambda)?, y)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    Ok(())
}

/// Which eigenvalue sits in the numerator of the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFloor {
    Smallest,
    /// Smallest eigenvalue above the rank tolerance.
    SmallestPositive,
}

/// `1 − σ_min(M) / Tr(M)` for symmetric PSD `M`.
///
/// With [`RateFloor::Smallest`] on a singular matrix this is `1` (no
/// contraction).
pub fn theoretical_rate(m: &DenseMatrix, floor: RateFloor) -> Result<f64> {
    let eigs = sym_eigs(m)?;
    let trace: f64 = m.trace();
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::DegenerateMatrix);
    }
    let spectral = eigs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let sigma = match floor {
        RateFloor::Smallest => eigs[0].max(0.0),
        RateFloor::SmallestPositive => eigs
            .iter()
            .copied()
            .find(|&v| v > RANK_TOL * spectral)
            .ok_or(Error::DegenerateMatrix)?,
    };
    Ok((1.0 - sigma / trace).clamp(0.0, 1.0))
}

/// Orthonormal basis of `null(X)` from the eigenvectors of `XᵀX`; `None` if `X`
/// has full column rank.
pub fn null_space_basis(x: &DenseMatrix) -> Result<Option<DenseMatrix>> {
    let eig = sym_eigen(&covariance(x))?;
    let spectral = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let k = eig.values.iter().take_while(|&&v| v <= RANK_TOL * spectral).count();
    if k == 0 {
        return Ok(None);
    }
    let p = x.n_cols();
    let data = eig.vectors.as_slice()[..p * k].to_vec();
    DenseMatrix::from_col_major(p, k, data).map(Some)
}

/// `‖P_null v‖` for an orthonormal null-space basis.
pub fn null_component_norm(basis: &DenseMatrix, v: &[f64]) -> Result<f64> {
    Ok(matvec_t(basis, v)?.norm())
}

/// A generated problem together with its regime's ground truth.
#[derive(Debug, Clone)]
pub struct RegimeInstance {
    pub problem: Problem,
    /// `β*`, `β_LS` or `β_MN` depending on the regime.
    pub reference: DenseVector,
    /// `y − X·reference` for inconsistent instances.
    pub noise: Option<DenseVector>,
    /// Orthonormal basis of `null(X)` for underdetermined instances.
    pub null_basis: Option<DenseMatrix>,
}

struct Gaussian<'a>(&'a mut RngState);

impl Gaussian<'_> {
    fn sample(&mut self) -> f64 {
        StandardNormal.sample(self.0.inner())
    }

    fn matrix(&mut self, n: usize, p: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, p, |_, _| self.sample()).expect("gaussian samples are finite")
    }

    fn vector(&mut self, n: usize) -> DenseVector {
        DenseVector::from_fn(n, |_| self.sample()).expect("gaussian samples are finite")
    }
}

fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Draws Gaussian `X` until its smaller Gram matrix is comfortably nonsingular.
fn full_rank_gaussian(n: usize, p: usize, seed: u64) -> Result<(DenseMatrix, RngState)> {
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = RngState::new(attempt_seed(seed, attempt));
        let x = Gaussian(&mut rng).matrix(n, p);
        let small = if n >= p { covariance(&x) } else { gram(&x) };
        let min_eig = sym_eigs(&small)?[0];
        if min_eig > MIN_SINGULAR_VALUE * MIN_SINGULAR_VALUE {
            return Ok((x, rng));
        }
    }
    Err(Error::GenerationFailure(MAX_GENERATION_ATTEMPTS))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if !cond {
        return Err(Error::InvalidParameter(msg.into()));
    }
    Ok(())
}

/// Overdetermined consistent instance: `y = Xβ*` with planted Gaussian `β*`.
pub fn gen_consistent(n: usize, p: usize, seed: u64) -> Result<RegimeInstance> {
    require(p >= 1 && n > p, "consistent instances need n > p >= 1")?;
    let (x, mut rng) = full_rank_gaussian(n, p, seed)?;
    let beta = Gaussian(&mut rng).vector(p);
    let y = matvec(&x, &beta)?;
    Ok(RegimeInstance {
        problem: Problem::new(x, y, Regime::ConsistentUnique)?,
        reference: beta,
        noise: None,
        null_basis: None,
    })
}

/// Overdetermined inconsistent instance: `y = Xβ_LS + z` with `Xᵀz = 0` and
/// `‖z‖ = noise_scale`.
pub fn gen_inconsistent(n: usize, p: usize, noise_scale: f64, seed: u64) -> Result<RegimeInstance> {
    require(p >= 1 && n > p, "inconsistent instances need n > p >= 1")?;
    require(
        noise_scale >= 0.0 && noise_scale.is_finite(),
        "noise scale must be >= 0",
    )?;
    let (x, mut rng) = full_rank_gaussian(n, p, seed)?;
    let beta = Gaussian(&mut rng).vector(p);
    let v = Gaussian(&mut rng).vector(n);

    let chol = Cholesky::new(&covariance(&x))?;
    let project = |v: &DenseVector| -> Result<DenseVector> {
        let coef = chol.solve(&matvec_t(&x, v)?)?;
        v.sub(&matvec(&x, &coef)?)
    };
    // Second pass removes what rounding left of the column-space component.
    let z = project(&project(&v)?)?;
    let norm = z.norm();
    let z = if norm > 0.0 { z.scale(noise_scale / norm) } else { z };
    let y = matvec(&x, &beta)?.add(&z)?;
    Ok(RegimeInstance {
        problem: Problem::new(x, y, Regime::Inconsistent)?,
        reference: beta,
        noise: Some(z),
        null_basis: None,
    })
}

/// Underdetermined consistent instance (`p > n`); the reference is `β_MN`.
pub fn gen_underdetermined(n: usize, p: usize, seed: u64) -> Result<RegimeInstance> {
    require(n >= 1 && p > n, "underdetermined instances need p > n >= 1")?;
    let (x, mut rng) = full_rank_gaussian(n, p, seed)?;
    let planted = Gaussian(&mut rng).vector(p);
    let y = matvec(&x, &planted)?;
    let reference = min_norm_solution(&x, &y)?;
    let null_basis = null_space_basis(&x)?;
    Ok(RegimeInstance {
        problem: Problem::new(x, y, Regime::Underdetermined)?,
        reference,
        noise: None,
        null_basis,
    })
}

/// Gaussian point cloud with a smooth target, for kernel experiments.
pub fn gen_kernel_data(n: usize, dim: usize, seed: u64) -> Result<(DenseMatrix, DenseVector)> {
    require(n >= 1 && dim >= 1, "kernel data needs n >= 1 and dim >= 1")?;
    let mut rng = RngState::new(seed);
    let mut g = Gaussian(&mut rng);
    let points = g.matrix(n, dim);
    let y = DenseVector::from_fn(n, |i| points.row(i).map(f64::sin).sum::<f64>() + 0.1 * g.sample())?;
    Ok((points, y))
}

/// Reference for RK/RCD on `problem` measured against `target`.
///
/// The energy norm is `Σ = XᵀX`. RK's bound is on the Euclidean error and
/// RCD's on the Σ-energy error; rank-deficient Σ uses the smallest positive
/// eigenvalue.
pub fn basic_reference(method: Method, problem: &Problem, target: DenseVector) -> Result<Reference> {
    let sigma = covariance(problem.x());
    let floor = if problem.n() < problem.p() {
        RateFloor::SmallestPositive
    } else {
        RateFloor::Smallest
    };
    Ok(Reference {
        target,
        rate: theoretical_rate(&sigma, floor)?,
        energy: EnergyNorm::Matrix(sigma),
        bound_metric: match method {
            Method::Rk => BoundMetric::Euclidean,
            Method::Rcd => BoundMetric::Energy,
        },
    })
}

/// Reference for the Kaczmarz ridge solver: `α*` in the `XXᵀ + λI` norm.
pub fn rk_ridge_reference(x: &DenseMatrix, y: &[f64], lambda: f64) -> Result<Reference> {
    let m = gram(x).shifted(lambda)?;
    Ok(Reference {
        target: ridge_dual_solution(x, y, lambda)?,
        rate: theoretical_rate(&m, RateFloor::Smallest)?,
        energy: EnergyNorm::Matrix(m),
        bound_metric: BoundMetric::Energy,
    })
}

/// Reference for the coordinate-descent ridge solver: `β_RR` in the
/// `XᵀX + λI` norm.
pub fn rcd_ridge_reference(x: &DenseMatrix, y: &[f64], lambda: f64) -> Result<Reference> {
    let m = covariance(x).shifted(lambda)?;
    Ok(Reference {
        target: ridge_solution(x, y, lambda)?,
        rate: theoretical_rate(&m, RateFloor::Smallest)?,
        energy: EnergyNorm::Matrix(m),
        bound_metric: BoundMetric::Energy,
    })
}

/// Reference for the kernel solver: `α*` in the `K + λI` norm.
pub fn krr_reference(points: &DenseMatrix, y: &[f64], spec: &KernelSpec, lambda: f64) -> Result<Reference> {
    let m = kernel_matrix(points, spec)?.shifted(lambda)?;
    Ok(Reference {
        target: solve_spd(&m, y)?,
        rate: theoretical_rate(&m, RateFloor::Smallest)?,
        energy: EnergyNorm::Matrix(m),
        bound_metric: BoundMetric::Energy,
    })
}
