//! Dense two-phase primal simplex for small linear programs.
//!
//! Problems are stated as `min c.v + k` subject to `A v <= b` and per-variable
//! bounds, any of which may be infinite. The entering column follows Bland's
//! rule; the leaving row uses a Harris two-pass ratio test so degenerate
//! vertices do not force pivots on tiny elements. The solver is deterministic.

mod dump;
mod problem;
mod simplex;

pub use problem::{LpProblem, LpSolution, LpStatus};
pub use simplex::{solve_lp, FEASIBILITY_TOL, PIVOT_TOL};
