use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::{Error, Result};

/// Per-dimension affine map of a fitted `[min, max]` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl AffineScaler {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(Error::dim("scaler bounds must be non-empty and of equal length"));
        }
        if let Some(j) = (0..min.len()).find(|&j| !(max[j] - min[j] > 0.0) || !(max[j] - min[j]).is_finite()) {
            return Err(Error::config(format!(
                "degenerate range [{}, {}] in dimension {j}",
                min[j], max[j]
            )));
        }
        Ok(AffineScaler { min, max })
    }

    /// Fit to the column ranges of `data`.
    pub fn fit(data: &Matrix) -> Result<Self> {
        if data.rows() == 0 {
            return Err(Error::config("cannot fit a scaler to an empty data set"));
        }
        let mut min = vec![f64::INFINITY; data.cols()];
        let mut max = vec![f64::NEG_INFINITY; data.cols()];
        for i in 0..data.rows() {
            for (j, &v) in data.row(i).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Self::new(min, max)
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `d scaled / d original` per dimension.
    pub fn gain(&self, j: usize) -> f64 {
        2.0 / (self.max[j] - self.min[j])
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| 2.0 * (v - self.min[j]) / (self.max[j] - self.min[j]) - 1.0)
            .collect()
    }

    pub fn inverse_transform(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .enumerate()
            .map(|(j, &v)| self.min[j] + (v + 1.0) * (self.max[j] - self.min[j]) / 2.0)
            .collect()
    }

    pub fn transform_scalar(&self, v: f64) -> f64 {
        self.transform(&[v])[0]
    }

    pub fn inverse_scalar(&self, v: f64) -> f64 {
        self.inverse_transform(&[v])[0]
    }

    pub fn transform_matrix(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for i in 0..m.rows() {
            let row = self.transform(m.row(i));
            out.row_mut(i).copy_from_slice(&row);
        }
        out
    }

    /// Rewrite `g . x <= h` over original units as a row over scaled inputs.
    pub fn map_constraint(&self, g: &[f64], h: f64) -> (Vec<f64>, f64) {
        // x_j = c_j + s_j * half_j
        let mut row = Vec::with_capacity(g.len());
        let mut rhs = h;
        for (j, &gj) in g.iter().enumerate() {
            let half = (self.max[j] - self.min[j]) / 2.0;
            let centre = (self.max[j] + self.min[j]) / 2.0;
            row.push(gj * half);
            rhs -= gj * centre;
        }
        (row, rhs)
    }
}
