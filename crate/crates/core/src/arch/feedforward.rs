use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Kind, NetworkSpec, INITIAL_SLOPE};
use crate::nn::{xavier_normal, Activation, DenseLayer, GradStore, LayerCache, Params};
use crate::{Error, Result};

/// A chain of dense layers ending in a single linear output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub layers: Vec<DenseLayer>,
}

impl Branch {
    /// Hidden layers, i.e. everything but the output unit.
    pub fn trunk(&self) -> &[DenseLayer] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn output_layer(&self) -> &DenseLayer {
        self.layers.last().expect("branch has an output layer")
    }

    pub(crate) fn forward_cached(&self, x: &[f64]) -> Vec<LayerCache> {
        let mut caches: Vec<LayerCache> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let z_prev = caches.last().map_or(x, |c| c.out.as_slice());
            let cache = layer.forward_cached(z_prev, x);
            caches.push(cache);
        }
        caches
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        self.forward_cached(x).last().expect("non-empty").out[0]
    }

    /// Backpropagate `upstream = dL/dy` into `grad` and `d_x`.
    pub(crate) fn backward(
        &self,
        x: &[f64],
        caches: &[LayerCache],
        upstream: f64,
        grad: &mut Branch,
        d_x: &mut [f64],
    ) {
        let mut d_out = vec![upstream];
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let mut d_prev = vec![0.0; layer.in_dim()];
            let z_prev = if k == 0 { x } else { &caches[k - 1].out };
            layer.backward(
                z_prev,
                x,
                &caches[k],
                &d_out,
                &mut grad.layers[k],
                Some(&mut d_prev),
                d_x,
            );
            if k == 0 {
                for (o, d) in d_x.iter_mut().zip(&d_prev) {
                    *o += d;
                }
            }
            d_out = d_prev;
        }
    }
}

impl Params for Branch {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.layers.iter().for_each(|l| l.visit(f));
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.layers.iter_mut().for_each(|l| l.visit_mut(f));
    }

    fn project(&mut self) {
        self.layers.iter_mut().for_each(DenseLayer::project);
    }
}

/// Feed-forward network `y = sum_b sign_b * branch_b(x)`.
///
/// Standard nets, ICNNs and CDiNN-1 have one branch; CDiNN-2 has two with
/// signs `+1` and `-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForward {
    pub spec: NetworkSpec,
    pub branches: Vec<Branch>,
    pub signs: Vec<f64>,
}

impl FeedForward {
    pub(crate) fn init<R: Rng>(spec: &NetworkSpec, rng: &mut R) -> Result<Self> {
        let sign = if spec.negate_output { -1.0 } else { 1.0 };
        let (branches, signs) = match spec.kind {
            Kind::Standard => (vec![branch(spec, false, false, rng)?], vec![sign]),
            Kind::Icnn => (vec![branch(spec, true, true, rng)?], vec![sign]),
            Kind::Cdinn1 => (vec![branch(spec, true, false, rng)?], vec![sign]),
            Kind::Cdinn2 => (
                vec![branch(spec, true, true, rng)?, branch(spec, true, true, rng)?],
                vec![sign, -sign],
            ),
            k => {
                return Err(Error::config(format!(
                    "{} is not a feed-forward kind",
                    k.name()
                )))
            }
        };
        Ok(FeedForward {
            spec: spec.clone(),
            branches,
            signs,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::dim(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.eval(x))
    }

    /// Unchecked forward pass.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.branches
            .iter()
            .zip(&self.signs)
            .map(|(b, s)| s * b.forward(x))
            .sum()
    }

    /// Accumulate `upstream * d y / d(params, x)` into `grad`/`d_x`; returns `y`.
    pub fn accumulate_gradient(
        &self,
        x: &[f64],
        upstream: f64,
        grad: &mut FeedForward,
        d_x: &mut [f64],
    ) -> f64 {
        let mut y = 0.0;
        for ((b, s), gb) in self.branches.iter().zip(&self.signs).zip(&mut grad.branches) {
            let caches = b.forward_cached(x);
            y += s * caches.last().expect("non-empty").out[0];
            b.backward(x, &caches, s * upstream, gb, d_x);
        }
        y
    }

    pub fn backward(&self, x: &[f64]) -> Result<GradStore<FeedForward>> {
        self.check_input(x)?;
        let mut params = self.zeros_like();
        let mut input = vec![0.0; x.len()];
        self.accumulate_gradient(x, 1.0, &mut params, &mut input);
        Ok(GradStore { params, input })
    }

    /// Gradient of the output with respect to the input only.
    pub fn input_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.backward(x)?.input)
    }

    /// Every slot that the architecture keeps nonnegative, as effective values.
    pub fn constrained_weights(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.branches {
            for l in b.layers.iter().filter(|l| l.nonneg) {
                out.extend(l.effective_weight().data());
            }
        }
        out
    }
}

impl Params for FeedForward {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.branches.iter().for_each(|b| b.visit(f));
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.branches.iter_mut().for_each(|b| b.visit_mut(f));
    }

    fn project(&mut self) {
        self.branches.iter_mut().for_each(Branch::project);
    }
}

/// One branch: first layer unconstrained on `x`, deeper z-paths nonnegative
/// when `convex_trunk`, output nonnegative when `convex_output`.
fn branch<R: Rng>(
    spec: &NetworkSpec,
    convex_trunk: bool,
    convex_output: bool,
    rng: &mut R,
) -> Result<Branch> {
    let d = spec.input_dim;
    let mut layers = Vec::with_capacity(spec.hidden.len() + 1);
    let mut prev = d;
    for (k, &width) in spec.hidden.iter().enumerate() {
        let mut layer = DenseLayer::zeros(width, prev, spec.activation);
        layer.weight = xavier_normal(width, prev, rng)?;
        layer.nonneg = convex_trunk && k > 0;
        if spec.passthrough && k > 0 {
            layer.passthrough = Some(xavier_normal(width, d, rng)?);
        }
        layer.bias_enabled = spec.bias;
        if spec.activation == Activation::PcRelu {
            layer.slope.fill(INITIAL_SLOPE);
        }
        layers.push(layer);
        prev = width;
    }
    let mut out = DenseLayer::zeros(1, prev, Activation::Linear);
    out.weight = xavier_normal(1, prev, rng)?;
    out.nonneg = convex_output;
    if spec.passthrough && spec.kind != Kind::Standard {
        out.passthrough = Some(xavier_normal(1, d, rng)?);
    }
    out.bias_enabled = spec.bias;
    layers.push(out);
    Ok(Branch { layers })
}
