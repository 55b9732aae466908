use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Matrix;
use crate::{Error, Result};

/// Xavier-normal matrix: entries ~ N(0, 2 / (rows + cols)), reproducible from `seed`.
pub fn xavier_normal_init(rows: usize, cols: usize, seed: u64) -> Result<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    xavier_normal(rows, cols, &mut rng)
}

/// Xavier-normal draw from a caller-owned stream.
pub fn xavier_normal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::dim(format!(
            "xavier init needs a non-empty shape, got {rows}x{cols}"
        )));
    }
    let std = (2.0 / (rows + cols) as f64).sqrt();
    let normal = Normal::new(0.0, std).map_err(|e| Error::config(e.to_string()))?;
    let data = (0..rows * cols).map(|_| normal.sample(rng)).collect();
    Matrix::from_vec(rows, cols, data)
}

pub fn zero_bias(len: usize) -> Vec<f64> {
    vec![0.0; len]
}
