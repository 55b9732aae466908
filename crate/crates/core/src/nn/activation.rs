use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Elementwise activation of a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    /// `max(a*s, s)` with a learnable per-neuron slope `a` in `[0, 1]`.
    PcRelu,
    Linear,
}

impl Activation {
    /// Activation value; `slope` is only read for [`Activation::PcRelu`].
    #[inline]
    pub fn apply(self, s: f64, slope: f64) -> f64 {
        match self {
            Activation::Relu => {
                if s >= 0.0 {
                    s
                } else {
                    0.0
                }
            }
            Activation::PcRelu => {
                if s >= 0.0 {
                    s
                } else {
                    slope * s
                }
            }
            Activation::Linear => s,
        }
    }

    /// Derivative with respect to the pre-activation. At the kink `s = 0`
    /// the right branch (slope 1) is used.
    #[inline]
    pub fn derivative(self, s: f64, slope: f64) -> f64 {
        match self {
            Activation::Relu => {
                if s >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::PcRelu => {
                if s >= 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Linear => 1.0,
        }
    }

    /// Derivative with respect to the PC-ReLU slope.
    #[inline]
    pub fn slope_derivative(self, s: f64) -> f64 {
        match self {
            Activation::PcRelu if s < 0.0 => s,
            _ => 0.0,
        }
    }

    /// Lower slope of the piecewise-linear activation: `act(s) = max(lo*s, s)`.
    /// `None` for the linear activation, which has no second piece.
    pub fn lower_slope(self, slope: f64) -> Option<f64> {
        match self {
            Activation::Relu => Some(0.0),
            Activation::PcRelu => Some(slope),
            Activation::Linear => None,
        }
    }
}

/// Parameter-constrained ReLU, `max(a*s, s)` for `a` in `[0, 1]`.
pub fn pc_relu(s: f64, a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::Contract(format!("PC-ReLU slope {a} outside [0, 1]")));
    }
    Ok((a * s).max(s))
}
