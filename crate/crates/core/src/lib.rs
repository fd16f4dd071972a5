//! Matrix-free randomized iterative solvers for linear systems, ridge
//! regression and kernel ridge regression.
//!
//! * [`solvers`]: randomized Kaczmarz (rows) and randomized coordinate
//!   descent (columns) for `Xβ = y`.
//! * [`ridge`]: the Kaczmarz-style dual solver and the shrinkage coordinate
//!   descent solver for ridge regression.
//! * [`kernel`]: Kaczmarz for kernel ridge regression that never forms the
//!   Gram matrix.
//! * [`oracle`]: closed-form references, theoretical rates and seeded problem
//!   generators used to check all of the above.
//! * [`trace`], [`harness`], [`io`]: checkpointed traces, multi-trial runs and
//!   the file formats.

pub mod error;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod ridge;
pub mod sampling;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};
pub use kernel::{kernel_eval, krr_predict, krr_run, KernelKaczmarz, KernelSpec, KrrState};
pub use linalg::{DenseMatrix, DenseVector};
pub use ridge::{rcd_ridge_run, rk_ridge_run, shrink, ColumnWeights, RidgeCoordinateDescent, RidgeKaczmarz};
pub use sampling::{RngState, Sampler, WeightedSampler};
pub use solvers::{run, CoordinateDescent, Kaczmarz, Method, Problem, Regime, RunConfig, SolverState};
pub use trace::{BoundMetric, ConvergenceTrace, EnergyNorm, IterativeSolver, Reference, StopReason, TraceRecord};
