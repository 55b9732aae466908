use serde::{Deserialize, Serialize};

use super::{Activation, Matrix, Params};
use crate::{Error, Result};

/// One dense layer `act(W z + P x + b)`.
///
/// When `nonneg` is set the stored `weight` is a raw parameter and the layer
/// uses its elementwise square, so the effective z-path weight can never be
/// negative. `passthrough` is the optional direct connection from the network
/// input and is always unconstrained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weight: Matrix,
    pub nonneg: bool,
    pub passthrough: Option<Matrix>,
    pub bias: Vec<f64>,
    pub bias_enabled: bool,
    pub activation: Activation,
    pub slope: Vec<f64>,
}

/// Pre-activations and outputs saved by a forward pass.
#[derive(Debug, Clone, Default)]
pub struct LayerCache {
    pub pre: Vec<f64>,
    pub out: Vec<f64>,
}

impl DenseLayer {
    /// A zero-initialised layer with `in_dim` z-inputs and `out_dim` units.
    pub fn zeros(out_dim: usize, in_dim: usize, activation: Activation) -> Self {
        DenseLayer {
            weight: Matrix::zeros(out_dim, in_dim),
            nonneg: false,
            passthrough: None,
            bias: vec![0.0; out_dim],
            bias_enabled: true,
            activation,
            slope: vec![0.0; out_dim],
        }
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn effective_weight(&self) -> Matrix {
        if self.nonneg {
            self.weight.squared()
        } else {
            self.weight.clone()
        }
    }

    /// Effective entry `(i, j)` of the z-path weight.
    #[inline]
    pub fn effective(&self, i: usize, j: usize) -> f64 {
        let w = self.weight[(i, j)];
        if self.nonneg {
            w * w
        } else {
            w
        }
    }

    fn check(&self, z_prev: &[f64], x: &[f64]) -> Result<()> {
        if z_prev.len() != self.in_dim() {
            return Err(Error::dim(format!(
                "layer expects {} inputs, got {}",
                self.in_dim(),
                z_prev.len()
            )));
        }
        if let Some(p) = &self.passthrough {
            if p.cols() != x.len() {
                return Err(Error::dim(format!(
                    "pass-through expects input of size {}, got {}",
                    p.cols(),
                    x.len()
                )));
            }
        }
        if self.bias.len() != self.out_dim() || self.slope.len() != self.out_dim() {
            return Err(Error::dim("bias/slope length differs from layer width"));
        }
        Ok(())
    }

    /// Pre-activation `W_eff z + P x + b`.
    pub fn pre_activation(&self, z_prev: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check(z_prev, x)?;
        Ok(self.pre_unchecked(z_prev, x))
    }

    /// Layer output after the activation.
    pub fn forward(&self, z_prev: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check(z_prev, x)?;
        Ok(self.forward_cached(z_prev, x).out)
    }

    pub(crate) fn pre_unchecked(&self, z_prev: &[f64], x: &[f64]) -> Vec<f64> {
        let mut pre = Vec::with_capacity(self.out_dim());
        for i in 0..self.out_dim() {
            let row = self.weight.row(i);
            let mut s = if self.nonneg {
                row.iter().zip(z_prev).map(|(w, z)| w * w * z).sum::<f64>()
            } else {
                row.iter().zip(z_prev).map(|(w, z)| w * z).sum::<f64>()
            };
            if let Some(p) = &self.passthrough {
                s += super::dot(p.row(i), x);
            }
            if self.bias_enabled {
                s += self.bias[i];
            }
            pre.push(s);
        }
        pre
    }

    pub(crate) fn forward_cached(&self, z_prev: &[f64], x: &[f64]) -> LayerCache {
        let pre = self.pre_unchecked(z_prev, x);
        let out = pre
            .iter()
            .zip(&self.slope)
            .map(|(&s, &a)| self.activation.apply(s, a))
            .collect();
        LayerCache { pre, out }
    }

    /// Accumulate gradients given `d_out = dL/d(out)`.
    ///
    /// `d_zprev`, when given, receives `dL/dz_prev` (accumulated); `d_x`
    /// receives the pass-through contribution to `dL/dx`.
    pub(crate) fn backward(
        &self,
        z_prev: &[f64],
        x: &[f64],
        cache: &LayerCache,
        d_out: &[f64],
        grad: &mut DenseLayer,
        d_zprev: Option<&mut [f64]>,
        d_x: &mut [f64],
    ) {
        let d_pre: Vec<f64> = d_out
            .iter()
            .zip(&cache.pre)
            .zip(&self.slope)
            .map(|((&g, &s), &a)| g * self.activation.derivative(s, a))
            .collect();

        for (i, (&g, &s)) in d_out.iter().zip(&cache.pre).enumerate() {
            grad.slope[i] += g * self.activation.slope_derivative(s);
        }
        if self.bias_enabled {
            for (b, &d) in grad.bias.iter_mut().zip(&d_pre) {
                *b += d;
            }
        }
        for (i, &d) in d_pre.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let w = self.weight.row(i);
            let gw = grad.weight.row_mut(i);
            if self.nonneg {
                for ((gij, &wij), &zj) in gw.iter_mut().zip(w).zip(z_prev) {
                    *gij += 2.0 * wij * zj * d;
                }
            } else {
                for (gij, &zj) in gw.iter_mut().zip(z_prev) {
                    *gij += zj * d;
                }
            }
        }
        if let Some(dz) = d_zprev {
            for (i, &d) in d_pre.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let w = self.weight.row(i);
                if self.nonneg {
                    for (o, &wij) in dz.iter_mut().zip(w) {
                        *o += wij * wij * d;
                    }
                } else {
                    for (o, &wij) in dz.iter_mut().zip(w) {
                        *o += wij * d;
                    }
                }
            }
        }
        if let (Some(p), Some(gp)) = (&self.passthrough, grad.passthrough.as_mut()) {
            gp.add_outer(&d_pre, x, 1.0);
            p.add_transpose_matvec(&d_pre, d_x);
        }
    }
}

impl DenseLayer {
    /// Input-only backward pass: accumulates `dL/dz_prev` and the
    /// pass-through part of `dL/dx`, leaving parameter gradients alone.
    pub(crate) fn backward_input(
        &self,
        cache: &LayerCache,
        d_out: &[f64],
        d_zprev: &mut [f64],
        d_x: &mut [f64],
    ) {
        for i in 0..self.out_dim() {
            let d = d_out[i] * self.activation.derivative(cache.pre[i], self.slope[i]);
            if d == 0.0 {
                continue;
            }
            for (j, o) in d_zprev.iter_mut().enumerate() {
                *o += self.effective(i, j) * d;
            }
            if let Some(p) = &self.passthrough {
                for (o, &pij) in d_x.iter_mut().zip(p.row(i)) {
                    *o += pij * d;
                }
            }
        }
    }
}

impl Params for DenseLayer {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.weight.data());
        if let Some(p) = &self.passthrough {
            f(p.data());
        }
        f(&self.bias);
        f(&self.slope);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.weight.data_mut());
        if let Some(p) = &mut self.passthrough {
            f(p.data_mut());
        }
        f(&mut self.bias);
        f(&mut self.slope);
    }

    fn project(&mut self) {
        for a in &mut self.slope {
            *a = a.clamp(0.0, 1.0);
        }
        if !self.bias_enabled {
            self.bias.fill(0.0);
        }
    }
}
