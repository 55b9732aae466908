use super::{Branch, FeedForward, Kind, NetworkSpec, Recurrent};
use crate::nn::{Activation, DenseLayer, Matrix};
use crate::{Error, Result};

/// ICNN computing `max_i(a_i . x + b_i)` exactly.
///
/// With `L_j = a_j . x + b_j` and `M_j = max(L_1..L_j)`, hidden unit `j`
/// holds `relu(M_j - L_{j+1})` and the chain uses `max(u, v) = relu(u - v) + v`:
/// unit 1 reads `x` directly, unit `j > 1` adds its predecessor with z-weight 1
/// and the pass-through `(a_j - a_{j+1}) . x + (b_j - b_{j+1})`, and the
/// output is `z_{k-1} + L_k`. A single affine map gets one zero unit.
pub fn max_affine_construct(affines: &[(Vec<f64>, f64)]) -> Result<FeedForward> {
    let k = affines.len();
    let Some((first, _)) = affines.first() else {
        return Err(Error::config("max of an empty set of affine functions"));
    };
    let d = first.len();
    if d == 0 || affines.iter().any(|(a, _)| a.len() != d) {
        return Err(Error::dim("affine slopes must share a non-zero dimension"));
    }
    let diff = |j: usize| -> (Vec<f64>, f64) {
        let (a, b) = &affines[j];
        let (a2, b2) = &affines[j + 1];
        (a.iter().zip(a2).map(|(p, q)| p - q).collect(), b - b2)
    };

    let hidden = (k - 1).max(1);
    let mut layers = Vec::with_capacity(hidden + 1);
    let mut first_layer = DenseLayer::zeros(1, d, Activation::Relu);
    if k > 1 {
        let (w, b) = diff(0);
        first_layer.weight = Matrix::from_vec(1, d, w)?;
        first_layer.bias = vec![b];
    }
    layers.push(first_layer);
    for j in 1..k - 1 {
        let (w, b) = diff(j);
        let mut layer = DenseLayer::zeros(1, 1, Activation::Relu);
        layer.weight[(0, 0)] = 1.0;
        layer.nonneg = true;
        layer.passthrough = Some(Matrix::from_vec(1, d, w)?);
        layer.bias = vec![b];
        layers.push(layer);
    }
    let (a_last, b_last) = &affines[k - 1];
    let mut out = DenseLayer::zeros(1, 1, Activation::Linear);
    out.weight[(0, 0)] = 1.0;
    out.nonneg = true;
    out.passthrough = Some(Matrix::from_vec(1, d, a_last.clone())?);
    out.bias = vec![*b_last];
    layers.push(out);

    let mut spec = NetworkSpec::new(Kind::Icnn, d, vec![1; hidden]);
    spec.activation = Activation::Relu;
    Ok(FeedForward {
        spec,
        branches: vec![Branch { layers }],
        signs: vec![1.0],
    })
}

/// Recurrent CDiNN realising `y_t = u_{t-m}` (zero for `t < m`) for scalar `u`.
///
/// The state holds a shift register of `(relu(u), relu(-u))` pairs,
/// `2(m + 1)` units in total, with the output `+1, -1` on the oldest pair.
/// Slopes are fixed at zero and biases are disabled.
pub fn delay_construct(m: usize) -> Recurrent {
    let h = 2 * (m + 1);
    let mut spec = NetworkSpec::new(Kind::RecurrentCdinn, 1, vec![h]);
    spec.bias = false;
    spec.activation = Activation::PcRelu;

    let mut input = Matrix::zeros(h, 1);
    input[(0, 0)] = 1.0;
    input[(1, 0)] = -1.0;
    let mut recurrent = Matrix::zeros(h, h);
    for unit in 2..h {
        recurrent[(unit, unit - 2)] = 1.0;
    }
    let mut output = Matrix::zeros(1, h);
    output[(0, h - 2)] = 1.0;
    output[(0, h - 1)] = -1.0;

    Recurrent {
        spec,
        input,
        recurrent,
        output,
        input_delay: None,
        output_prev: None,
        output_input: None,
        hidden_bias: vec![0.0; h],
        output_bias: vec![0.0],
        slope: vec![0.0; h],
        nonneg_maps: false,
    }
}
