use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `min objective . v + constant` s.t. `rows[i] . v <= rhs[i]`, `lower <= v <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constant: f64,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted; not expected for well-scaled problems.
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

impl LpProblem {
    /// `n` free variables named `v0..`, zero objective, no rows.
    pub fn new(n: usize) -> Self {
        LpProblem {
            objective: vec![0.0; n],
            constant: 0.0,
            rows: Vec::new(),
            rhs: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            names: (0..n).map(|j| format!("v{j}")).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Append a variable and return its index.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(name.into());
        for r in &mut self.rows {
            r.push(0.0);
        }
        self.objective.len() - 1
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    /// Append `row . v <= rhs`.
    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// Append a sparse `sum coef_j v_j <= rhs`.
    pub fn add_le_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, c) in terms {
            row[j] += c;
        }
        self.add_le(row, rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n || self.names.len() != n {
            return Err(Error::dim("bounds/names do not match the variable count"));
        }
        if self.rhs.len() != self.rows.len() {
            return Err(Error::dim("one right-hand side per row is required"));
        }
        if let Some(r) = self.rows.iter().find(|r| r.len() != n) {
            return Err(Error::dim(format!(
                "constraint row has {} coefficients for {n} variables",
                r.len()
            )));
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.constant.is_finite()
            && self.rows.iter().flatten().all(|v| v.is_finite())
            && self.rhs.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Contract("LP coefficients must be finite".into()));
        }
        if self.lower.iter().any(|&l| l == f64::INFINITY || l.is_nan())
            || self.upper.iter().any(|&u| u == f64::NEG_INFINITY || u.is_nan())
        {
            return Err(Error::Contract("invalid variable bound".into()));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        crate::nn::dot(&self.objective, x) + self.constant
    }

    /// Largest violation of any row or bound at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, &b)| crate::nn::dot(r, x) - b);
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .flat_map(|(&v, (&l, &u))| [l - v, v - u]);
        rows.chain(bounds).fold(0.0, f64::max)
    }
}
