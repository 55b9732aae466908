use serde::{Deserialize, Serialize};

use super::Params;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moment accumulators over the flattened parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new<P: Params>(params: &P, config: AdamConfig) -> Self {
        let n = params.num_params();
        AdamState {
            config,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// One bias-corrected Adam update followed by [`Params::project`].
    pub fn step<P: Params>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let g = grads.flatten();
        if g.len() != self.m.len() || params.num_params() != self.m.len() {
            return Err(Error::dim(format!(
                "adam state holds {} moments, got {} gradients for {} parameters",
                self.m.len(),
                g.len(),
                params.num_params()
            )));
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);

        let (m, v) = (&mut self.m, &mut self.v);
        let mut k = 0;
        params.visit_mut(&mut |slice| {
            for p in slice.iter_mut() {
                let gk = g[k];
                m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
                k += 1;
            }
        });
        params.project();
        Ok(())
    }
}
