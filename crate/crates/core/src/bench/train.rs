use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use crate::arch::{build, Network, NetworkSpec, Recurrent};
use crate::nn::{AdamConfig, AdamState, Params};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// Cosine decay from `lr` towards zero over the run.
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    /// Samples per Adam step; `None` trains full-batch.
    pub batch_size: Option<usize>,
    /// Seeds the minibatch shuffles.
    pub seed: u64,
    pub restarts: usize,
    pub schedule: LrSchedule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 800,
            lr: 1e-2,
            batch_size: None,
            seed: 0,
            restarts: 3,
            schedule: LrSchedule::Constant,
        }
    }
}

impl TrainConfig {
    fn lr_at(&self, epoch: usize) -> f64 {
        match self.schedule {
            LrSchedule::Constant => self.lr,
            LrSchedule::Cosine => {
                let frac = epoch as f64 / self.epochs.max(1) as f64;
                0.5 * self.lr * (1.0 + (std::f64::consts::PI * frac).cos())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::config("learning rate must be positive"));
        }
        if self.batch_size == Some(0) {
            return Err(Error::config("batch size must be positive"));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts must be at least 1"));
        }
        Ok(())
    }
}

/// Mean squared error of `net` over `ds` (all steps for sequence data).
pub fn mse(net: &Network, ds: &Dataset) -> Result<f64> {
    check_shapes(net, ds)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..ds.len() {
        match net {
            Network::FeedForward(f) => {
                let e = f.eval(ds.input(i)) - ds.target(i);
                total += e * e;
                count += 1;
            }
            Network::Recurrent(r) => {
                let ys = r.forward(&ds.sequence(i))?;
                for (y, t) in ys.iter().zip(ds.targets.row(i)) {
                    total += (y - t) * (y - t);
                }
                count += ys.len();
            }
        }
    }
    Ok(total / count.max(1) as f64)
}

fn check_shapes(net: &Network, ds: &Dataset) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::config("empty data set"));
    }
    if net.spec().input_dim != ds.input_dim() {
        return Err(Error::config(format!(
            "{} network takes {} inputs but the data has {}",
            net.kind().name(),
            net.spec().input_dim,
            ds.input_dim()
        )));
    }
    if net.kind().is_recurrent() != ds.is_sequence() {
        return Err(Error::config(if ds.is_sequence() {
            "sequence data needs a recurrent architecture"
        } else {
            "recurrent architectures need sequence data"
        }));
    }
    Ok(())
}

/// Accumulates the MSE gradient over `batch` into `grad`; returns the summed squared error.
fn batch_gradient(net: &Network, ds: &Dataset, batch: &[usize], grad: &mut Network) -> f64 {
    let mut sse = 0.0;
    match (net, grad) {
        (Network::FeedForward(f), Network::FeedForward(g)) => {
            let scale = 2.0 / batch.len() as f64;
            let mut d_x = vec![0.0; f.input_dim()];
            for &i in batch {
                let x = ds.input(i);
                let caches: Vec<_> = f.branches.iter().map(|b| b.forward_cached(x)).collect();
                let y: f64 = caches
                    .iter()
                    .zip(&f.signs)
                    .map(|(c, s)| s * c.last().expect("non-empty").out[0])
                    .sum();
                let e = y - ds.target(i);
                sse += e * e;
                for (((b, c), s), gb) in f.branches.iter().zip(&caches).zip(&f.signs).zip(&mut g.branches) {
                    b.backward(x, c, s * scale * e, gb, &mut d_x);
                }
            }
        }
        (Network::Recurrent(r), Network::Recurrent(g)) => {
            let steps = ds.seq_len.unwrap_or(1);
            let scale = 2.0 / (batch.len() * steps) as f64;
            for &i in batch {
                sse += sequence_gradient(r, ds, i, scale, g);
            }
        }
        _ => unreachable!("gradient store mirrors the network"),
    }
    sse
}

fn sequence_gradient(r: &Recurrent, ds: &Dataset, i: usize, scale: f64, grad: &mut Recurrent) -> f64 {
    let caches = r.forward_cached(&ds.sequence(i));
    let mut sse = 0.0;
    let d_y: Vec<f64> = caches
        .iter()
        .zip(ds.targets.row(i))
        .map(|(c, t)| {
            let e = c.y - t;
            sse += e * e;
            scale * e
        })
        .collect();
    r.backward_cached(&caches, &d_y, grad);
    sse
}

/// Adam on the MSE for `cfg.epochs` epochs, starting from `net`.
/// Returns the trained network and its final MSE over `ds`.
pub fn train(mut net: Network, ds: &Dataset, cfg: &TrainConfig) -> Result<(Network, f64)> {
    cfg.validate()?;
    check_shapes(&net, ds)?;
    let adam_cfg = AdamConfig { lr: cfg.lr, ..AdamConfig::default() };
    let mut adam = AdamState::new(&net, adam_cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let batch = cfg.batch_size.unwrap_or(ds.len()).min(ds.len());
    let mut grad = net.zeros_like();
    for epoch in 0..cfg.epochs {
        if cfg.batch_size.is_some() {
            order.shuffle(&mut rng);
        }
        adam.config.lr = cfg.lr_at(epoch);
        let mut sse = 0.0;
        for chunk in order.chunks(batch) {
            grad.visit_mut(&mut |s| s.fill(0.0));
            sse += batch_gradient(&net, ds, chunk, &mut grad);
            adam.step(&mut net, &grad)?;
        }
        if !sse.is_finite() || !net.all_finite() {
            return Err(Error::Diverged { epoch, loss: sse / ds.len() as f64 });
        }
    }
    let loss = mse(&net, ds)?;
    if !loss.is_finite() {
        return Err(Error::Diverged { epoch: cfg.epochs, loss });
    }
    Ok((net, loss))
}

/// One training run per restart; restart `r` initialises from `spec.seed + r`
/// and shuffles with `cfg.seed + r`.
pub fn train_restarts(spec: &NetworkSpec, ds: &Dataset, cfg: &TrainConfig) -> Result<Vec<(Network, f64)>> {
    cfg.validate()?;
    (0..cfg.restarts as u64)
        .map(|r| {
            let net = build(&spec.clone().with_seed(spec.seed.wrapping_add(r)))?;
            let run_cfg = TrainConfig { seed: cfg.seed.wrapping_add(r), ..cfg.clone() };
            train(net, ds, &run_cfg).map_err(|e| e.with_context(format!("restart {r}")))
        })
        .collect()
}
