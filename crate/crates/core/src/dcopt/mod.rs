//! Optimisation over trained networks: the convex-concave procedure (CCP)
//! driven by epigraph LPs, and a filtered subgradient baseline.

mod ccp;
mod constraints;
mod epigraph;
mod subgrad;

use serde::{Deserialize, Serialize};

use crate::lp::LpStatus;
use crate::{Error, Result};

pub use ccp::{ccp_optimize, linearize_concave, CcpConfig};
pub use constraints::ConstraintSet;
pub use epigraph::epigraph_lp;
pub use subgrad::{filtered_subgrad, StepSchedule, SubgradConfig};

/// Gains between the network's coordinates and the units an optimiser
/// steps and tests convergence in: `x_j = c_j + input[j] * x_net_j` and
/// `y = c + output * y_net`. Offsets do not affect the iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub input: Vec<f64>,
    pub output: f64,
}

impl Units {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.input.len() != dim {
            return Err(Error::dim(format!("units have {} input gains, expected {dim}", self.input.len())));
        }
        if !self.input.iter().chain([&self.output]).all(|g| g.is_finite() && *g > 0.0) {
            return Err(Error::config("unit gains must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    LpFailure,
    /// Non-finite objective during a subgradient run.
    Diverged,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
            Termination::LpFailure => "lp_failure",
            Termination::Diverged => "diverged",
        }
    }
}

/// One iterate. Record 0 is the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub x: Vec<f64>,
    /// Network output at `x`.
    pub objective: f64,
    /// CCP surrogate at `x` (a bound on the objective in the optimised direction).
    pub surrogate: Option<f64>,
    pub lp_status: Option<LpStatus>,
    pub lp_pivots: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimTrace {
    pub records: Vec<IterRecord>,
    pub termination: Termination,
    pub maximize: bool,
    pub seconds: f64,
}

impl OptimTrace {
    /// The last accepted iterate.
    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("trace always holds the start point")
    }

    pub fn final_x(&self) -> &[f64] {
        &self.last().x
    }

    pub fn final_objective(&self) -> f64 {
        self.last().objective
    }

    /// Number of update steps taken (excluding the start point).
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    /// Largest step against the optimisation direction between consecutive iterates.
    pub fn worst_ascent(&self) -> f64 {
        let sign = if self.maximize { -1.0 } else { 1.0 };
        self.records
            .windows(2)
            .map(|w| sign * (w[1].objective - w[0].objective))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
