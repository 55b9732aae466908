use std::time::Instant;

use super::{epigraph_lp, ConstraintSet, IterRecord, OptimTrace, Termination, Units};
use crate::arch::{dc_split, ConvexPiece, FeedForward};
use crate::lp::{solve_lp, LpStatus};
use crate::nn::dot;
use crate::{Error, Result};

/// Tolerance for accepting the starting point against the affine rows.
const START_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CcpConfig {
    pub max_iterations: usize,
    /// Stop once consecutive objectives differ by less than this.
    pub epsilon: f64,
    pub x0: Vec<f64>,
    /// Maximise the network output by minimising its negation.
    pub maximize: bool,
    /// Units for the stopping test; only the output gain is used.
    pub units: Option<Units>,
}

impl CcpConfig {
    pub fn new(x0: Vec<f64>) -> Self {
        CcpConfig { max_iterations: 200, epsilon: 1e-5, x0, maximize: false, units: None }
    }

    pub fn validate(&self, cons: &ConstraintSet) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::config("convergence precision must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        if let Some(u) = &self.units {
            u.validate(cons.dim())?;
        }
        if self.x0.len() != cons.dim() {
            return Err(Error::dim(format!(
                "start point has {} coordinates, constraints have {}",
                self.x0.len(),
                cons.dim()
            )));
        }
        if !cons.contains(&self.x0, START_TOL) {
            return Err(Error::config(format!("start point {:?} is infeasible", self.x0)));
        }
        Ok(())
    }
}

/// Affine minorant of `-f2` at `x0`, as `(q, r)` with `-f2(x) <= q.x + r`
/// and equality at `x0`.
pub fn linearize_concave(f2: &ConvexPiece<'_>, x0: &[f64]) -> (Vec<f64>, f64) {
    let (value, grad) = f2.value_and_gradient(x0);
    let r = -value + dot(&grad, x0);
    (grad.into_iter().map(|g| -g).collect(), r)
}

/// Convex-concave procedure over the DC split of `net`.
pub fn ccp_optimize(net: &FeedForward, cons: &ConstraintSet, cfg: &CcpConfig) -> Result<OptimTrace> {
    cfg.validate(cons)?;
    if net.input_dim() != cons.dim() {
        return Err(Error::dim("network and constraint set dimensions differ"));
    }
    let started = Instant::now();
    let split = dc_split(net)?;
    let split = if cfg.maximize { split.negated() } else { split };
    let sign = if cfg.maximize { -1.0 } else { 1.0 };

    let mut x = cfg.x0.clone();
    let mut value = split.eval(&x);
    let mut records = vec![IterRecord {
        x: x.clone(),
        objective: sign * value,
        surrogate: None,
        lp_status: None,
        lp_pivots: None,
    }];
    let mut termination = Termination::MaxIter;
    for _ in 0..cfg.max_iterations {
        let (q, r) = linearize_concave(&split.f2, &x);
        let lp = epigraph_lp(&split.f1, &q, r, cons)?;
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            termination = Termination::LpFailure;
            break;
        }
        let mut next = sol.x[..cons.dim()].to_vec();
        cons.clip(&mut next);
        let next_value = split.eval(&next);
        records.push(IterRecord {
            x: next.clone(),
            objective: sign * next_value,
            surrogate: Some(sign * sol.value),
            lp_status: Some(sol.status),
            lp_pivots: Some(sol.iterations),
        });
        let delta = (next_value - value).abs() * cfg.units.as_ref().map_or(1.0, |u| u.output);
        x = next;
        value = next_value;
        if delta < cfg.epsilon {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(OptimTrace {
        records,
        termination,
        maximize: cfg.maximize,
        seconds: started.elapsed().as_secs_f64(),
    })
}
