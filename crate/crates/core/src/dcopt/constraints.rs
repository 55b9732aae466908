use serde::{Deserialize, Serialize};

use crate::lp::{solve_lp, LpProblem, LpStatus};
use crate::{Error, Result};

/// Box bounds plus affine rows `G x <= h`. Always has a nonempty feasible region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
    g: Vec<Vec<f64>>,
    h: Vec<f64>,
}

impl ConstraintSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::new(lower, upper, Vec::new(), Vec::new())
    }

    /// Validates shapes and probes feasibility with an LP.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, g: Vec<Vec<f64>>, h: Vec<f64>) -> Result<Self> {
        let d = lower.len();
        if upper.len() != d {
            return Err(Error::dim("box bounds differ in length"));
        }
        if d == 0 {
            return Err(Error::dim("constraint set needs at least one coordinate"));
        }
        if g.len() != h.len() || g.iter().any(|r| r.len() != d) {
            return Err(Error::dim(format!("affine rows must have {d} coefficients and one bound each")));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u) {
            return Err(Error::Infeasible("box has a lower bound above its upper bound".into()));
        }
        let set = ConstraintSet { lower, upper, g, h };
        let probe = solve_lp(&set.base_lp(0))?;
        if probe.status != LpStatus::Optimal {
            return Err(Error::Infeasible("constraint set has an empty feasible region".into()));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.g
    }

    pub fn rhs(&self) -> &[f64] {
        &self.h
    }

    /// In the box exactly and within `tol` on the affine rows.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.in_box(x) && self.affine_violation(x) <= tol
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn affine_violation(&self, x: &[f64]) -> f64 {
        self.g
            .iter()
            .zip(&self.h)
            .map(|(r, b)| crate::nn::dot(r, x) - b)
            .fold(0.0, f64::max)
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    /// LP over `x` (the first `dim()` variables) plus `extra` free variables,
    /// carrying the box and the affine rows.
    pub(crate) fn base_lp(&self, extra: usize) -> LpProblem {
        let d = self.dim();
        let mut lp = LpProblem::new(d + extra);
        for j in 0..d {
            lp.set_bounds(j, self.lower[j], self.upper[j]);
            lp.names[j] = format!("x{j}");
        }
        for (r, &b) in self.g.iter().zip(&self.h) {
            let mut row = r.clone();
            row.resize(d + extra, 0.0);
            lp.add_le(row, b);
        }
        lp
    }
}
