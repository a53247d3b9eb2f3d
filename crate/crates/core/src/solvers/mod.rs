//! Self-contained numerical kernels: dense two-phase simplex, a convex QP
//! over products of unit simplices, and the special functions used for
//! critical values.

pub(crate) mod linalg;
pub mod lp;
pub mod qp;
pub mod special;

pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus, Sense};
pub use qp::{solve_simplex_qp, QpBlock, QpBlockSolution, SimplexQp};
pub use special::{chisq_cdf, chisq_quantile, logit_cdf, normal_quantile, probit_cdf};

/// Default primal feasibility tolerance for the LP.
pub const FEAS_TOL: f64 = 1e-8;
/// Default optimality tolerance for the LP.
pub const OPT_TOL: f64 = 1e-8;
