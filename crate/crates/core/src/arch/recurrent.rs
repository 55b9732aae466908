use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Kind, NetworkSpec, INITIAL_SLOPE};
use crate::nn::{xavier_normal, Activation, GradStore, Matrix, Params};
use crate::{Error, Result};

/// Recurrent ICNN / recurrent CDiNN.
///
/// ```text
/// z_t = act(U x_t + Z z_{t-1} + D x_{t-1} + b)
/// y_t = f_a(M z_t + N z_{t-1} + V x_t + c)
/// ```
///
/// `Z` is always stored raw and used squared. For the recurrent ICNN every
/// other map is squared as well and `D`, `N`, `V` are present; the recurrent
/// CDiNN has only `U`, `Z`, `M` with `U` and `M` unconstrained. The hidden
/// state starts at zero and `x_0` is preceded by a zero input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recurrent {
    pub spec: NetworkSpec,
    pub input: Matrix,
    pub recurrent: Matrix,
    pub output: Matrix,
    pub input_delay: Option<Matrix>,
    pub output_prev: Option<Matrix>,
    pub output_input: Option<Matrix>,
    pub hidden_bias: Vec<f64>,
    pub output_bias: Vec<f64>,
    pub slope: Vec<f64>,
    /// Square `U`, `M`, `D`, `N`, `V` (recurrent ICNN).
    pub nonneg_maps: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    x: Vec<f64>,
    pre: Vec<f64>,
    z: Vec<f64>,
    out_pre: f64,
    pub(crate) y: f64,
}

#[inline]
fn eff(w: f64, nonneg: bool) -> f64 {
    if nonneg {
        w * w
    } else {
        w
    }
}

/// `out += W_eff v`
fn mv_acc(w: &Matrix, nonneg: bool, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o += w.row(i).iter().zip(v).map(|(&a, &b)| eff(a, nonneg) * b).sum::<f64>();
    }
}

/// `out += W_eff^T d`
fn mtv_acc(w: &Matrix, nonneg: bool, d: &[f64], out: &mut [f64]) {
    for (i, &di) in d.iter().enumerate() {
        if di == 0.0 {
            continue;
        }
        for (o, &a) in out.iter_mut().zip(w.row(i)) {
            *o += eff(a, nonneg) * di;
        }
    }
}

/// `g += (d v^T) * dW_eff/dW`
fn grad_acc(w: &Matrix, nonneg: bool, g: &mut Matrix, d: &[f64], v: &[f64]) {
    for (i, &di) in d.iter().enumerate() {
        if di == 0.0 {
            continue;
        }
        let wr = w.row(i);
        for ((gij, &wij), &vj) in g.row_mut(i).iter_mut().zip(wr).zip(v) {
            *gij += if nonneg { 2.0 * wij * vj * di } else { vj * di };
        }
    }
}

impl Recurrent {
    pub(crate) fn init<R: Rng>(spec: &NetworkSpec, rng: &mut R) -> Result<Self> {
        let h = spec.hidden[0];
        let d = spec.input_dim * if spec.expand_input { 2 } else { 1 };
        let icnn = spec.kind == Kind::RecurrentIcnn;
        let mut net = Recurrent {
            spec: spec.clone(),
            input: xavier_normal(h, d, rng)?,
            recurrent: xavier_normal(h, h, rng)?,
            output: xavier_normal(1, h, rng)?,
            input_delay: None,
            output_prev: None,
            output_input: None,
            hidden_bias: vec![0.0; h],
            output_bias: vec![0.0],
            slope: vec![0.0; h],
            nonneg_maps: icnn,
        };
        if icnn && spec.passthrough {
            net.input_delay = Some(xavier_normal(h, d, rng)?);
            net.output_prev = Some(xavier_normal(1, h, rng)?);
            net.output_input = Some(xavier_normal(1, d, rng)?);
        }
        if spec.activation == Activation::PcRelu {
            net.slope.fill(INITIAL_SLOPE);
        }
        Ok(net)
    }

    pub fn hidden_dim(&self) -> usize {
        self.recurrent.rows()
    }

    fn expand(&self, u: &[f64]) -> Vec<f64> {
        if self.spec.expand_input {
            u.iter().copied().chain(u.iter().map(|v| -v)).collect()
        } else {
            u.to_vec()
        }
    }

    fn check(&self, inputs: &[Vec<f64>]) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::dim("empty input sequence"));
        }
        if let Some(u) = inputs.iter().find(|u| u.len() != self.spec.input_dim) {
            return Err(Error::dim(format!(
                "sequence element has {} entries, expected {}",
                u.len(),
                self.spec.input_dim
            )));
        }
        Ok(())
    }

    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check(inputs)?;
        Ok(self.forward_cached(inputs).iter().map(|c| c.y).collect())
    }

    pub(crate) fn forward_cached(&self, inputs: &[Vec<f64>]) -> Vec<StepCache> {
        let h = self.hidden_dim();
        let act = self.spec.activation;
        let bias = self.spec.bias;
        let nn = self.nonneg_maps;
        let mut caches: Vec<StepCache> = Vec::with_capacity(inputs.len());
        for u in inputs {
            let x = self.expand(u);
            let zero_z = vec![0.0; h];
            let (z_prev, x_prev) = match caches.last() {
                Some(c) => (c.z.as_slice(), Some(c.x.as_slice())),
                None => (zero_z.as_slice(), None),
            };
            let mut pre = if bias {
                self.hidden_bias.clone()
            } else {
                vec![0.0; h]
            };
            mv_acc(&self.input, nn, &x, &mut pre);
            mv_acc(&self.recurrent, true, z_prev, &mut pre);
            if let (Some(dm), Some(xp)) = (&self.input_delay, x_prev) {
                mv_acc(dm, nn, xp, &mut pre);
            }
            let z: Vec<f64> = pre
                .iter()
                .zip(&self.slope)
                .map(|(&s, &a)| act.apply(s, a))
                .collect();
            let mut o = [if bias { self.output_bias[0] } else { 0.0 }];
            mv_acc(&self.output, nn, &z, &mut o);
            if let Some(n) = &self.output_prev {
                mv_acc(n, nn, z_prev, &mut o);
            }
            if let Some(v) = &self.output_input {
                mv_acc(v, nn, &x, &mut o);
            }
            let y = self.spec.output_activation.apply(o[0], 0.0);
            caches.push(StepCache {
                x,
                pre,
                z,
                out_pre: o[0],
                y,
            });
        }
        caches
    }

    /// Backpropagation through time for cotangents `d_y[t] = dL/dy_t`.
    /// Returns `dL/du_t` for every step (un-expanded input space).
    pub(crate) fn backward_cached(
        &self,
        caches: &[StepCache],
        d_y: &[f64],
        grad: &mut Recurrent,
    ) -> Vec<Vec<f64>> {
        let h = self.hidden_dim();
        let xd = self.input.cols();
        let act = self.spec.activation;
        let bias = self.spec.bias;
        let nn = self.nonneg_maps;
        let t_len = caches.len();
        let mut d_x = vec![vec![0.0; xd]; t_len];
        // dL/dz_t contributions flowing back from step t+1.
        let mut carry = vec![0.0; h];
        let zeros = vec![0.0; h];

        for t in (0..t_len).rev() {
            let c = &caches[t];
            let z_prev = if t > 0 { &caches[t - 1].z } else { &zeros };
            let d_o = d_y[t] * self.spec.output_activation.derivative(c.out_pre, 0.0);
            let d_o = [d_o];

            let mut d_z = std::mem::take(&mut carry);
            mtv_acc(&self.output, nn, &d_o, &mut d_z);
            grad_acc(&self.output, nn, &mut grad.output, &d_o, &c.z);
            let mut d_zprev = vec![0.0; h];
            if let (Some(n), Some(gn)) = (&self.output_prev, grad.output_prev.as_mut()) {
                grad_acc(n, nn, gn, &d_o, z_prev);
                mtv_acc(n, nn, &d_o, &mut d_zprev);
            }
            if let (Some(v), Some(gv)) = (&self.output_input, grad.output_input.as_mut()) {
                grad_acc(v, nn, gv, &d_o, &c.x);
                mtv_acc(v, nn, &d_o, &mut d_x[t]);
            }
            if bias {
                grad.output_bias[0] += d_o[0];
            }

            let d_pre: Vec<f64> = d_z
                .iter()
                .zip(&c.pre)
                .zip(&self.slope)
                .map(|((&g, &s), &a)| g * act.derivative(s, a))
                .collect();
            for (i, (&g, &s)) in d_z.iter().zip(&c.pre).enumerate() {
                grad.slope[i] += g * act.slope_derivative(s);
            }
            if bias {
                for (b, &d) in grad.hidden_bias.iter_mut().zip(&d_pre) {
                    *b += d;
                }
            }
            grad_acc(&self.input, nn, &mut grad.input, &d_pre, &c.x);
            mtv_acc(&self.input, nn, &d_pre, &mut d_x[t]);
            grad_acc(&self.recurrent, true, &mut grad.recurrent, &d_pre, z_prev);
            mtv_acc(&self.recurrent, true, &d_pre, &mut d_zprev);
            if t > 0 {
                if let (Some(dm), Some(gd)) = (&self.input_delay, grad.input_delay.as_mut()) {
                    let x_prev = &caches[t - 1].x;
                    grad_acc(dm, nn, gd, &d_pre, x_prev);
                    mtv_acc(dm, nn, &d_pre, &mut d_x[t - 1]);
                }
            }
            carry = d_zprev;
        }

        let d = self.spec.input_dim;
        d_x.into_iter()
            .map(|g| {
                if self.spec.expand_input {
                    (0..d).map(|j| g[j] - g[j + d]).collect()
                } else {
                    g
                }
            })
            .collect()
    }

    /// Gradient of `sum_t cotangent[t] * y_t`. The input part of the result
    /// is the flattened `dL/du`, step-major.
    pub fn backward(
        &self,
        inputs: &[Vec<f64>],
        cotangent: &[f64],
    ) -> Result<GradStore<Recurrent>> {
        self.check(inputs)?;
        if cotangent.len() != inputs.len() {
            return Err(Error::dim("one cotangent per time step is required"));
        }
        let caches = self.forward_cached(inputs);
        let mut params = self.zeros_like();
        let d_u = self.backward_cached(&caches, cotangent, &mut params);
        Ok(GradStore {
            params,
            input: d_u.concat(),
        })
    }

    /// Effective values of every slot kept nonnegative by squaring.
    pub fn constrained_weights(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.recurrent.squared().data().to_vec();
        if self.nonneg_maps {
            out.extend(self.input.squared().data());
            out.extend(self.output.squared().data());
            for m in [&self.input_delay, &self.output_prev, &self.output_input]
                .into_iter()
                .flatten()
            {
                out.extend(m.squared().data());
            }
        }
        out
    }
}

impl Params for Recurrent {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.input.data());
        f(self.recurrent.data());
        f(self.output.data());
        for m in [&self.input_delay, &self.output_prev, &self.output_input]
            .into_iter()
            .flatten()
        {
            f(m.data());
        }
        f(&self.hidden_bias);
        f(&self.output_bias);
        f(&self.slope);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.input.data_mut());
        f(self.recurrent.data_mut());
        f(self.output.data_mut());
        for m in [
            &mut self.input_delay,
            &mut self.output_prev,
            &mut self.output_input,
        ]
        .into_iter()
        .flatten()
        {
            f(m.data_mut());
        }
        f(&mut self.hidden_bias);
        f(&mut self.output_bias);
        f(&mut self.slope);
    }

    fn project(&mut self) {
        for a in &mut self.slope {
            *a = a.clamp(0.0, 1.0);
        }
        if !self.spec.bias {
            self.hidden_bias.fill(0.0);
            self.output_bias.fill(0.0);
        }
    }
}
