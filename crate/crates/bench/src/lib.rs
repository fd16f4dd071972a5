//! Fixtures shared by the step benchmarks.

use randiter::oracle::{gen_consistent, gen_kernel_data};
use randiter::{DenseMatrix, DenseVector, Problem};

/// A consistent overdetermined instance (`n > p`).
pub fn instance(n: usize, p: usize, seed: u64) -> Problem {
    gen_consistent(n, p, seed).expect("benchmark instance").problem
}

pub fn kernel_points(n: usize, dim: usize, seed: u64) -> (DenseMatrix, DenseVector) {
    gen_kernel_data(n, dim, seed).expect("benchmark points")
}
