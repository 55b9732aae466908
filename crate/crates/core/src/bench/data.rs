use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::functions::{spill_concentration, SpillParams, TestFunction};
use super::scaler::AffineScaler;
use crate::nn::Matrix;
use crate::{Error, Result};

/// Enough to regenerate a data set exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
}

impl Provenance {
    fn new(generator: &str, seed: u64, params: &[(&str, String)]) -> Self {
        Provenance {
            generator: generator.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            seed,
        }
    }
}

/// Input/target pairs. Sequence data stores one sequence per row, with
/// `seq_len` steps of `input_dim` inputs and one target per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Matrix,
    pub targets: Matrix,
    pub seq_len: Option<usize>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(inputs: Matrix, targets: Matrix, seq_len: Option<usize>, provenance: Provenance) -> Result<Self> {
        if inputs.rows() != targets.rows() {
            return Err(Error::dim(format!(
                "{} input rows but {} target rows",
                inputs.rows(),
                targets.rows()
            )));
        }
        match seq_len {
            None if targets.cols() != 1 => {
                return Err(Error::dim("pointwise data needs exactly one target column"))
            }
            Some(t) if t == 0 || targets.cols() != t || inputs.cols() % t != 0 => {
                return Err(Error::dim("sequence data needs seq_len targets and seq_len input blocks"))
            }
            _ => {}
        }
        Ok(Dataset { inputs, targets, seq_len, provenance })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inputs per sample (per step for sequence data).
    pub fn input_dim(&self) -> usize {
        self.inputs.cols() / self.seq_len.unwrap_or(1)
    }

    pub fn is_sequence(&self) -> bool {
        self.seq_len.is_some()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        self.inputs.row(i)
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets.row(i)[0]
    }

    /// Row `i` split into per-step input vectors.
    pub fn sequence(&self, i: usize) -> Vec<Vec<f64>> {
        self.inputs.row(i).chunks(self.input_dim()).map(<[f64]>::to_vec).collect()
    }

    /// Pointwise data mapped through input and target scalers.
    pub fn scaled(&self, x: &AffineScaler, y: &AffineScaler) -> Result<Dataset> {
        if self.is_sequence() {
            return Err(Error::Unsupported("scaling sequence data".into()));
        }
        if x.dim() != self.input_dim() || y.dim() != 1 {
            return Err(Error::dim("scaler dimensions do not match the data"));
        }
        let mut provenance = self.provenance.clone();
        provenance.params.insert("scaled".into(), "true".into());
        Dataset::new(
            x.transform_matrix(&self.inputs),
            y.transform_matrix(&self.targets),
            None,
            provenance,
        )
    }

    fn pointwise(rows: Vec<Vec<f64>>, targets: Vec<f64>, provenance: Provenance) -> Result<Dataset> {
        let n = targets.len();
        Dataset::new(Matrix::from_rows(&rows)?, Matrix::from_vec(n, 1, targets)?, None, provenance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionKind {
    Sine,
    Quadratic,
    Cubic,
}

impl RegressionKind {
    pub const ALL: [RegressionKind; 3] = [RegressionKind::Sine, RegressionKind::Quadratic, RegressionKind::Cubic];

    pub fn name(self) -> &'static str {
        match self {
            RegressionKind::Sine => "sine",
            RegressionKind::Quadratic => "quadratic",
            RegressionKind::Cubic => "cubic",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            RegressionKind::Sine => (5.0 * x).sin() / 5.0,
            RegressionKind::Quadratic => x * x,
            RegressionKind::Cubic => x * x * x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Circles,
    Moons,
}

impl ClassKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassKind::Circles => "circles",
            ClassKind::Moons => "moons",
        }
    }
}

/// `n` points uniform on `[-1, 1]` with noiseless targets.
pub fn regression_1d(kind: RegressionKind, n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::config("regression data needs at least 2 points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let ys = xs.iter().map(|&x| kind.eval(x)).collect();
    let prov = Provenance::new(kind.name(), seed, &[("n", n.to_string())]);
    Dataset::pointwise(xs.into_iter().map(|x| vec![x]).collect(), ys, prov)
}

/// Two-class planar data with 0/1 labels.
///
/// Circles: class 0 on the unit circle, class 1 on radius 0.5, angles evenly
/// spaced. Moons: class 0 on `(cos t, sin t)`, class 1 on
/// `(1 - cos t, 0.5 - sin t)`, `t` evenly spaced on `[0, pi]`. Both add
/// isotropic Gaussian noise with standard deviation `noise`.
pub fn classify_2d(kind: ClassKind, n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::config("classification data needs an even, positive n"));
    }
    if !(noise >= 0.0) {
        return Err(Error::config("noise must be nonnegative"));
    }
    let half = n / 2;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for class in 0..2 {
        for i in 0..half {
            let p = match kind {
                ClassKind::Circles => {
                    let t = 2.0 * PI * i as f64 / half as f64;
                    let r = if class == 0 { 1.0 } else { 0.5 };
                    [r * t.cos(), r * t.sin()]
                }
                ClassKind::Moons => {
                    let t = if half > 1 { PI * i as f64 / (half - 1) as f64 } else { 0.0 };
                    if class == 0 {
                        [t.cos(), t.sin()]
                    } else {
                        [1.0 - t.cos(), 0.5 - t.sin()]
                    }
                }
            };
            rows.push(p.to_vec());
            labels.push(class as f64);
        }
    }
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise).map_err(|e| Error::config(e.to_string()))?;
        for r in &mut rows {
            for v in r.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }
    let prov = Provenance::new(kind.name(), seed, &[("n", n.to_string()), ("noise", noise.to_string())]);
    Dataset::pointwise(rows, labels, prov)
}

/// Longest delay in the delay-sum target.
pub const MAX_DELAY: usize = 4;

/// Sequences of `u_t ~ U[-1, 1]` with targets `y_t = u_{t-1} + .. + u_{t-4}`,
/// treating inputs before the start of a sequence as zero.
pub fn delay_dataset(n_sequences: usize, seq_len: usize, seed: u64) -> Result<Dataset> {
    if seq_len < MAX_DELAY + 1 {
        return Err(Error::config(format!("sequence length must be at least {}", MAX_DELAY + 1)));
    }
    if n_sequences == 0 {
        return Err(Error::config("need at least one sequence"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(n_sequences * seq_len);
    let mut targets = Vec::with_capacity(n_sequences * seq_len);
    for _ in 0..n_sequences {
        let u: Vec<f64> = (0..seq_len).map(|_| rng.random_range(-1.0..=1.0)).collect();
        targets.extend(delay_targets(&u));
        inputs.extend(u);
    }
    let prov = Provenance::new(
        "delay",
        seed,
        &[("n_sequences", n_sequences.to_string()), ("seq_len", seq_len.to_string())],
    );
    Dataset::new(
        Matrix::from_vec(n_sequences, seq_len, inputs)?,
        Matrix::from_vec(n_sequences, seq_len, targets)?,
        Some(seq_len),
        prov,
    )
}

/// Delay-sum targets for one scalar sequence.
pub fn delay_targets(u: &[f64]) -> Vec<f64> {
    (0..u.len())
        .map(|t| (1..=MAX_DELAY).filter(|&k| k <= t).fold(0.0, |acc, k| acc + u[t - k]))
        .collect()
}

/// Full tensor grid of `points` per axis over the function's domain.
/// Sumpower uses a 5-point lattice plus `extra` uniform points instead.
pub fn function_grid(f: TestFunction, points: usize, extra: usize, seed: u64) -> Result<Dataset> {
    if points < 2 {
        return Err(Error::config("grid needs at least 2 points per axis"));
    }
    let w = f.half_width();
    let d = f.dim();
    let axis: Vec<f64> = (0..points)
        .map(|i| -w + 2.0 * w * i as f64 / (points - 1) as f64)
        .collect();
    let total = points.pow(d as u32);
    let mut rows = Vec::with_capacity(total + extra);
    for mut k in 0..total {
        let mut x = Vec::with_capacity(d);
        for _ in 0..d {
            x.push(axis[k % points]);
            k /= points;
        }
        rows.push(x);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        rows.push((0..d).map(|_| rng.random_range(-w..=w)).collect());
    }
    let ys = rows.iter().map(|x| f.eval(x)).collect();
    let prov = Provenance::new(
        f.name(),
        seed,
        &[("points", points.to_string()), ("extra", extra.to_string())],
    );
    Dataset::pointwise(rows, ys, prov)
}

/// Default training grid for each test function.
pub fn default_function_data(f: TestFunction, seed: u64) -> Result<Dataset> {
    match f {
        TestFunction::Sumpower => function_grid(f, 5, 875, seed),
        _ => function_grid(f, 41, 0, seed),
    }
}

/// Grid points `k * step` that fall inside `[lo, hi]`.
pub fn multiples_in(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Concentration sampled on the multiples of `step` inside the spill domain.
pub fn spill_grid(p: &SpillParams, step: f64) -> Result<Dataset> {
    p.validate()?;
    if !(step > 0.0) {
        return Err(Error::config("grid step must be positive"));
    }
    let locs = multiples_in(p.location_range.0, p.location_range.1, step);
    let times = multiples_in(p.time_range.0, p.time_range.1, step);
    let mut rows = Vec::with_capacity(locs.len() * times.len());
    let mut ys = Vec::with_capacity(rows.capacity());
    for &s in &locs {
        for &t in &times {
            rows.push(vec![s, t]);
            ys.push(spill_concentration(s, t, p));
        }
    }
    let prov = Provenance::new(
        "spill",
        0,
        &[
            ("step", step.to_string()),
            ("mass", p.mass.to_string()),
            ("diffusion", p.diffusion.to_string()),
        ],
    );
    Dataset::pointwise(rows, ys, prov)
}
