use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{ConstraintSet, IterRecord, OptimTrace, Termination, Units};
use crate::arch::FeedForward;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    /// `alpha_k = alpha0`
    Constant,
    /// `alpha_k = alpha0 / k`
    OverK,
}

impl std::str::FromStr for StepSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(StepSchedule::Constant),
            "over_k" | "overk" => Ok(StepSchedule::OverK),
            other => Err(Error::config(format!("unknown step schedule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradConfig {
    pub alpha0: f64,
    pub schedule: StepSchedule,
    pub beta: f64,
    pub max_iterations: usize,
    pub epsilon: f64,
    pub x0: Vec<f64>,
    /// Step and test convergence in these units instead of the network's.
    pub units: Option<Units>,
}

impl SubgradConfig {
    pub fn new(alpha0: f64, schedule: StepSchedule, x0: Vec<f64>) -> Self {
        SubgradConfig { alpha0, schedule, beta: 0.25, max_iterations: 200, epsilon: 1e-5, x0, units: None }
    }

    pub fn validate(&self, cons: &ConstraintSet) -> Result<()> {
        if !(self.alpha0 > 0.0) || !self.alpha0.is_finite() {
            return Err(Error::config("alpha0 must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::config("beta must lie in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("convergence precision must be positive"));
        }
        if let Some(u) = &self.units {
            u.validate(cons.dim())?;
        }
        if self.x0.len() != cons.dim() {
            return Err(Error::dim("start point and constraint dimensions differ"));
        }
        if !cons.in_box(&self.x0) {
            return Err(Error::config(format!("start point {:?} is outside the box", self.x0)));
        }
        Ok(())
    }

    fn step(&self, k: usize) -> f64 {
        match self.schedule {
            StepSchedule::Constant => self.alpha0,
            StepSchedule::OverK => self.alpha0 / k as f64,
        }
    }
}

/// Filtered-beta subgradient descent with box clipping. Affine rows of
/// `cons` are ignored.
///
/// With `cfg.units` set, the gradient, step and stopping test are those of
/// the rescaled function `y(x)`; iterates are still stored in network
/// coordinates.
pub fn filtered_subgrad(
    net: &FeedForward,
    cons: &ConstraintSet,
    cfg: &SubgradConfig,
    maximize: bool,
) -> Result<OptimTrace> {
    cfg.validate(cons)?;
    if net.input_dim() != cons.dim() {
        return Err(Error::dim("network and constraint set dimensions differ"));
    }
    let started = Instant::now();
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut x = cfg.x0.clone();
    let mut value = net.eval(&x);
    let record = |x: &[f64], objective: f64| IterRecord {
        x: x.to_vec(),
        objective,
        surrogate: None,
        lp_status: None,
        lp_pivots: None,
    };
    let mut records = vec![record(&x, value)];
    let mut s = vec![0.0; x.len()];
    let (in_gain, out_gain) = match &cfg.units {
        Some(u) => (u.input.clone(), u.output),
        None => (vec![1.0; x.len()], 1.0),
    };
    let mut termination = Termination::MaxIter;
    for k in 1..=cfg.max_iterations {
        let g = net.input_gradient(&x)?;
        let alpha = cfg.step(k);
        for (j, (sj, xj)) in s.iter_mut().zip(x.iter_mut()).enumerate() {
            let gj = g[j] * out_gain / in_gain[j];
            *sj = (1.0 - cfg.beta) * sign * gj + cfg.beta * *sj;
            *xj -= alpha * *sj / in_gain[j];
        }
        cons.clip(&mut x);
        let next = net.eval(&x);
        records.push(record(&x, next));
        if !next.is_finite() || x.iter().any(|v| !v.is_finite()) {
            termination = Termination::Diverged;
            break;
        }
        let delta = (next - value).abs() * out_gain;
        value = next;
        if delta < cfg.epsilon {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(OptimTrace { records, termination, maximize, seconds: started.elapsed().as_secs_f64() })
}
