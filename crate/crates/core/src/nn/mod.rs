//! Dense tensors, layers, activations, gradients and the Adam optimizer.

mod activation;
mod adam;
mod init;
mod layer;
mod matrix;
mod params;

pub use activation::{pc_relu, Activation};
pub use adam::{AdamConfig, AdamState};
pub use init::{xavier_normal, xavier_normal_init, zero_bias};
pub use layer::{DenseLayer, LayerCache};
pub use matrix::Matrix;
pub use params::{GradStore, Params};

/// Dot product of two equal-length slices.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
