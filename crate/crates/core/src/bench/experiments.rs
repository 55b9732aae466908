use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{
    classify_2d, default_function_data, delay_dataset, regression_1d, spill_grid, ClassKind, Dataset,
    RegressionKind,
};
use super::functions::{spill_concentration, SpillParams, TestFunction};
use super::scaler::AffineScaler;
use super::train::{mse, train, LrSchedule, TrainConfig};
use crate::arch::{build, delay_construct, FeedForward, Kind, Network, NetworkSpec};
use crate::dcopt::{
    ccp_optimize, filtered_subgrad, CcpConfig, ConstraintSet, OptimTrace, StepSchedule, SubgradConfig, Units,
};
use crate::nn::Params;
use crate::{Error, Result};

/// Knobs shared by every experiment runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: Option<usize>,
    pub schedule: LrSchedule,
    /// Overrides the experiment's own restart count.
    pub restarts: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            epochs: 800,
            lr: 1e-2,
            batch_size: Some(32),
            schedule: LrSchedule::Cosine,
            restarts: None,
        }
    }
}

impl ExperimentConfig {
    pub fn train_config(&self, default_restarts: usize) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            batch_size: self.batch_size,
            seed: self.seed,
            restarts: self.restarts.unwrap_or(default_restarts),
            schedule: self.schedule,
        }
    }
}

/// A trained network with the scalers it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub net: Network,
    pub x_scaler: Option<AffineScaler>,
    pub y_scaler: Option<AffineScaler>,
    /// MSE on the (scaled, if scalers are present) training data.
    pub fit_mse: f64,
    pub restart: usize,
    pub seed: u64,
    pub epochs: usize,
}

impl FittedModel {
    pub fn feedforward(&self) -> Result<&FeedForward> {
        self.net
            .as_feedforward()
            .ok_or_else(|| Error::Unsupported("recurrent model used as a pointwise map".into()))
    }

    pub fn scale_input(&self, x: &[f64]) -> Vec<f64> {
        self.x_scaler.as_ref().map_or_else(|| x.to_vec(), |s| s.transform(x))
    }

    pub fn unscale_input(&self, x: &[f64]) -> Vec<f64> {
        self.x_scaler.as_ref().map_or_else(|| x.to_vec(), |s| s.inverse_transform(x))
    }

    pub fn unscale_output(&self, y: f64) -> f64 {
        self.y_scaler.as_ref().map_or(y, |s| s.inverse_scalar(y))
    }

    /// Prediction in original units.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let y = self.net.forward(&self.scale_input(x))?;
        Ok(self.unscale_output(y))
    }

    /// Original units relative to the network's scaled coordinates.
    pub fn units(&self) -> Option<Units> {
        let xs = self.x_scaler.as_ref()?;
        let ys = self.y_scaler.as_ref()?;
        Some(Units {
            input: (0..xs.dim()).map(|j| 1.0 / xs.gain(j)).collect(),
            output: 1.0 / ys.gain(0),
        })
    }

    /// Constraint set over scaled inputs from a box and rows in original units.
    pub fn constraints(&self, lower: &[f64], upper: &[f64], rows: &[(Vec<f64>, f64)]) -> Result<ConstraintSet> {
        let (lo, hi) = (self.scale_input(lower), self.scale_input(upper));
        let mapped: Vec<(Vec<f64>, f64)> = rows
            .iter()
            .map(|(g, h)| match &self.x_scaler {
                Some(s) => s.map_constraint(g, *h),
                None => (g.clone(), *h),
            })
            .collect();
        let (g, h) = mapped.into_iter().unzip();
        ConstraintSet::new(lo, hi, g, h)
    }
}

/// Train every restart of `spec` on `raw`, optionally under fitted min/max scalers.
pub fn fit_models(spec: &NetworkSpec, raw: &Dataset, scale: bool, cfg: &TrainConfig) -> Result<Vec<FittedModel>> {
    cfg.validate()?;
    let (x_scaler, y_scaler, data) = if scale {
        let xs = AffineScaler::fit(&raw.inputs)?;
        let ys = AffineScaler::fit(&raw.targets)?;
        let data = raw.scaled(&xs, &ys)?;
        (Some(xs), Some(ys), data)
    } else {
        (None, None, raw.clone())
    };
    (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = spec.seed.wrapping_add(r as u64);
            let net = build(&spec.clone().with_seed(seed))?;
            let run = TrainConfig { seed: cfg.seed.wrapping_add(r as u64), ..cfg.clone() };
            let (net, fit_mse) = train(net, &data, &run)
                .map_err(|e| e.with_context(format!("{} restart {r}", spec.kind.name())))?;
            Ok(FittedModel {
                net,
                x_scaler: x_scaler.clone(),
                y_scaler: y_scaler.clone(),
                fit_mse,
                restart: r,
                seed,
                epochs: cfg.epochs,
            })
        })
        .collect()
}

/// Distinct initialisation streams per architecture within one experiment.
fn kind_seed(base: u64, kind: Kind) -> u64 {
    let k = Kind::ALL.iter().position(|&x| x == kind).unwrap_or(0) as u64;
    base.wrapping_mul(1_000_003).wrapping_add(1000 * k)
}

/// A CSV-ready table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Columns holding wall-clock timings.
    pub timing_columns: Vec<usize>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            timing_columns: header
                .iter()
                .enumerate()
                .filter(|(_, h)| h.ends_with("seconds"))
                .map(|(i, _)| i)
                .collect(),
        }
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(";")
}

fn fmt(x: f64) -> String {
    format!("{x:.6e}")
}

// ---------------------------------------------------------------- table 1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub task: String,
    pub mse_with_passthrough: f64,
    pub mse_without_passthrough: f64,
}

fn table1_tasks(seed: u64) -> Result<Vec<(String, Dataset)>> {
    let mut tasks = Vec::new();
    for kind in RegressionKind::ALL {
        tasks.push((format!("1D {}", kind.name()), regression_1d(kind, 200, seed)?));
    }
    for kind in [ClassKind::Circles, ClassKind::Moons] {
        tasks.push((format!("2D {}", kind.name()), classify_2d(kind, 200, 0.1, seed)?));
    }
    Ok(tasks)
}

fn best_mse(models: &[FittedModel]) -> f64 {
    models.iter().map(|m| m.fit_mse).fold(f64::INFINITY, f64::min)
}

/// CDiNN-1 with two hidden layers of 20, with and without pass-through.
pub fn table1(cfg: &ExperimentConfig) -> Result<Vec<AblationRow>> {
    let tcfg = cfg.train_config(3);
    table1_tasks(cfg.seed)?
        .into_par_iter()
        .map(|(task, ds)| {
            let mut mses = [0.0; 2];
            for (slot, pass) in [(0, true), (1, false)] {
                let spec = NetworkSpec::new(Kind::Cdinn1, ds.input_dim(), vec![20, 20])
                    .with_passthrough(pass)
                    .with_seed(kind_seed(cfg.seed, Kind::Cdinn1));
                mses[slot] = best_mse(&fit_models(&spec, &ds, false, &tcfg)?);
            }
            Ok(AblationRow {
                task,
                mse_with_passthrough: mses[0],
                mse_without_passthrough: mses[1],
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.with_context("table1"))
}

fn table1_table(rows: &[AblationRow]) -> Table {
    let mut t = Table::new("table1", &["function", "fit_mse_with_passthrough", "fit_mse_without_passthrough"]);
    for r in rows {
        t.rows.push(vec![r.task.clone(), fmt(r.mse_with_passthrough), fmt(r.mse_without_passthrough)]);
    }
    t
}

// ---------------------------------------------------------------- regression

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub task: String,
    pub kind: Kind,
    pub hidden: Vec<usize>,
    pub passthrough: bool,
    pub fit_mse: f64,
}

/// The architectures compared on the 1-D targets: a CDiNN-1 and a
/// single-layer ICNN of 10 units with pass-through.
pub fn regression_specs() -> [(Kind, Vec<usize>, bool); 2] {
    [(Kind::Cdinn1, vec![20, 20], false), (Kind::Icnn, vec![10], true)]
}

pub fn regression(cfg: &ExperimentConfig) -> Result<Vec<FitRow>> {
    let tcfg = cfg.train_config(3);
    let mut cells = Vec::new();
    for kind in RegressionKind::ALL {
        for (arch, hidden, pass) in regression_specs() {
            cells.push((kind, arch, hidden, pass));
        }
    }
    cells
        .into_par_iter()
        .map(|(kind, arch, hidden, pass)| {
            let ds = regression_1d(kind, 200, cfg.seed)?;
            let spec = NetworkSpec::new(arch, 1, hidden.clone())
                .with_passthrough(pass)
                .with_seed(kind_seed(cfg.seed, arch));
            Ok(FitRow {
                task: kind.name().into(),
                kind: arch,
                hidden,
                passthrough: pass,
                fit_mse: best_mse(&fit_models(&spec, &ds, false, &tcfg)?),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.with_context("regression"))
}

fn fit_table(name: &str, rows: &[FitRow]) -> Table {
    let mut t = Table::new(name, &["task", "type", "hidden", "passthrough", "fit_mse"]);
    for r in rows {
        t.rows.push(vec![
            r.task.clone(),
            r.kind.label().into(),
            r.hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join("x"),
            r.passthrough.to_string(),
            fmt(r.fit_mse),
        ]);
    }
    t
}

// ---------------------------------------------------------------- classification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSearchRow {
    pub kind: Kind,
    pub method: String,
    /// Coordinate held fixed during the search, if any.
    pub fixed: Option<usize>,
    pub x0: Vec<f64>,
    pub x_opt: Vec<f64>,
    pub y_start: f64,
    pub y_opt: f64,
    pub iterations: usize,
    pub termination: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub fits: Vec<FitRow>,
    pub searches: Vec<InputSearchRow>,
}

const CLASS_STARTS: [[f64; 2]; 4] = [[1.2, 1.2], [-1.2, 0.3], [0.2, -1.1], [0.9, -0.4]];

/// Fits on circles and moons, then minimises the trained circles models
/// over the input box from fixed starts, with and without the second
/// coordinate held fixed.
pub fn classification(cfg: &ExperimentConfig) -> Result<ClassificationReport> {
    let tcfg = cfg.train_config(3);
    let archs = [
        (Kind::Standard, vec![20, 20], false),
        (Kind::Icnn, vec![20, 20], true),
        (Kind::Cdinn1, vec![20, 20], false),
    ];
    let cells: Vec<_> = [ClassKind::Circles, ClassKind::Moons]
        .into_iter()
        .flat_map(|c| archs.iter().cloned().map(move |a| (c, a)))
        .collect();
    let fitted = cells
        .into_par_iter()
        .map(|(class, (kind, hidden, pass))| {
            let ds = classify_2d(class, 200, 0.1, cfg.seed)?;
            let spec = NetworkSpec::new(kind, 2, hidden.clone())
                .with_passthrough(pass)
                .with_seed(kind_seed(cfg.seed, kind));
            let models = fit_models(&spec, &ds, false, &tcfg)?;
            let best = models
                .into_iter()
                .min_by(|a, b| a.fit_mse.total_cmp(&b.fit_mse))
                .expect("at least one restart");
            Ok((class, hidden, pass, best))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.with_context("classification"))?;

    let mut fits = Vec::new();
    let mut searches = Vec::new();
    for (class, hidden, pass, model) in &fitted {
        fits.push(FitRow {
            task: class.name().into(),
            kind: model.net.kind(),
            hidden: hidden.clone(),
            passthrough: *pass,
            fit_mse: model.fit_mse,
        });
        if *class != ClassKind::Circles {
            continue;
        }
        let net = model.feedforward()?;
        for x0 in CLASS_STARTS {
            for fixed in [None, Some(1)] {
                let (mut lo, mut hi) = (vec![-1.5; 2], vec![1.5; 2]);
                if let Some(j) = fixed {
                    lo[j] = x0[j];
                    hi[j] = x0[j];
                }
                let cons = ConstraintSet::boxed(lo, hi)?;
                let (method, trace) = if net.spec.kind == Kind::Standard {
                    let sc = SubgradConfig::new(0.1, StepSchedule::Constant, x0.to_vec());
                    ("subgrad", filtered_subgrad(net, &cons, &sc, false)?)
                } else {
                    let cc = CcpConfig { epsilon: 1e-5, ..CcpConfig::new(x0.to_vec()) };
                    ("ccp", ccp_optimize(net, &cons, &cc)?)
                };
                searches.push(InputSearchRow {
                    kind: net.spec.kind,
                    method: method.into(),
                    fixed,
                    x0: x0.to_vec(),
                    x_opt: trace.final_x().to_vec(),
                    y_start: trace.records[0].objective,
                    y_opt: trace.final_objective(),
                    iterations: trace.iterations(),
                    termination: trace.termination.name().into(),
                });
            }
        }
    }
    Ok(ClassificationReport { fits, searches })
}

fn search_table(rows: &[InputSearchRow]) -> Table {
    let mut t = Table::new(
        "classification_search",
        &["type", "method", "fixed", "x0", "x_opt", "y_start", "y_opt", "iterations", "termination"],
    );
    for r in rows {
        t.rows.push(vec![
            r.kind.label().into(),
            r.method.clone(),
            r.fixed.map_or("none".into(), |j| format!("x{j}")),
            fmt_vec(&r.x0),
            fmt_vec(&r.x_opt),
            fmt(r.y_start),
            fmt(r.y_opt),
            r.iterations.to_string(),
            r.termination.clone(),
        ]);
    }
    t
}

// ---------------------------------------------------------------- delay

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub ricnn_train_mse: f64,
    pub ricnn_test_mse: f64,
    pub rcdinn_train_mse: f64,
    pub rcdinn_test_mse: f64,
    /// Largest error of the hand-built delay networks over the test inputs.
    pub construct_max_error: f64,
}

impl DelayReport {
    pub fn ratio(&self) -> f64 {
        self.rcdinn_test_mse / self.ricnn_test_mse
    }
}

pub const DELAY_UNITS: usize = 10;
pub const DELAY_SEQ_LEN: usize = 5;

/// Recurrent ICNN vs recurrent CDiNN on the delay-sum target, biases off.
pub fn delay(cfg: &ExperimentConfig) -> Result<DelayReport> {
    let train_ds = delay_dataset(1000, DELAY_SEQ_LEN, cfg.seed)?;
    let test_ds = delay_dataset(500, DELAY_SEQ_LEN, cfg.seed.wrapping_add(7919))?;
    let tcfg = cfg.train_config(3);
    let fits = [Kind::RecurrentIcnn, Kind::RecurrentCdinn]
        .into_par_iter()
        .map(|kind| {
            let spec = NetworkSpec::new(kind, 1, vec![DELAY_UNITS])
                .with_bias(false)
                .with_seed(kind_seed(cfg.seed, kind));
            let models = fit_models(&spec, &train_ds, false, &tcfg)?;
            let best = models
                .into_iter()
                .min_by(|a, b| a.fit_mse.total_cmp(&b.fit_mse))
                .expect("at least one restart");
            let test = mse(&best.net, &test_ds)?;
            Ok((best.fit_mse, test))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.with_context("delay"))?;

    let mut worst: f64 = 0.0;
    let constructs: Vec<_> = (1..=super::data::MAX_DELAY).map(delay_construct).collect();
    for i in 0..test_ds.len() {
        let seq = test_ds.sequence(i);
        let mut sum = vec![0.0; seq.len()];
        for c in &constructs {
            for (s, y) in sum.iter_mut().zip(c.forward(&seq)?) {
                *s += y;
            }
        }
        for (s, t) in sum.iter().zip(test_ds.targets.row(i)) {
            worst = worst.max((s - t).abs());
        }
    }
    Ok(DelayReport {
        ricnn_train_mse: fits[0].0,
        ricnn_test_mse: fits[0].1,
        rcdinn_train_mse: fits[1].0,
        rcdinn_test_mse: fits[1].1,
        construct_max_error: worst,
    })
}

fn delay_table(r: &DelayReport) -> Table {
    let mut t = Table::new("delay", &["network", "train_mse", "test_mse"]);
    t.rows.push(vec!["Recurrent ICNN (no bias)".into(), fmt(r.ricnn_train_mse), fmt(r.ricnn_test_mse)]);
    t.rows.push(vec!["Recurrent CDiNN (no bias)".into(), fmt(r.rcdinn_train_mse), fmt(r.rcdinn_test_mse)]);
    t.rows.push(vec!["ratio rCDiNN/rICNN".into(), String::new(), fmt(r.ratio())]);
    t.rows.push(vec!["delay construct max error".into(), String::new(), fmt(r.construct_max_error)]);
    t
}

// ---------------------------------------------------------------- table 2

/// Optimiser used on a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Ccp,
    Subgrad { alpha0: f64, schedule: StepSchedule },
}

impl Method {
    pub fn algorithm(&self) -> &'static str {
        match self {
            Method::Ccp => "CCP",
            Method::Subgrad { .. } => "GD",
        }
    }

    pub fn params(&self) -> String {
        match self {
            Method::Ccp => String::new(),
            Method::Subgrad { alpha0, schedule } => format!(
                "alpha0={alpha0} {}",
                match schedule {
                    StepSchedule::Constant => "constant",
                    StepSchedule::OverK => "over_k",
                }
            ),
        }
    }

    /// Runs the optimiser on a fitted model from `x0` in original units.
    /// Steps and the stopping tolerance are in original units as well.
    pub fn run(&self, model: &FittedModel, cons: &ConstraintSet, x0: &[f64], tol: f64, max_iter: usize, maximize: bool) -> Result<OptimTrace> {
        let net = model.feedforward()?;
        let x0 = model.scale_input(x0);
        let units = model.units();
        match self {
            Method::Ccp => {
                let cfg = CcpConfig { max_iterations: max_iter, epsilon: tol, x0, maximize, units };
                ccp_optimize(net, cons, &cfg)
            }
            Method::Subgrad { alpha0, schedule } => {
                let cfg = SubgradConfig {
                    max_iterations: max_iter,
                    epsilon: tol,
                    units,
                    ..SubgradConfig::new(*alpha0, *schedule, x0)
                };
                filtered_subgrad(net, cons, &cfg, maximize)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRow {
    pub func: TestFunction,
    pub kind: Kind,
    pub method: Method,
    pub tol: f64,
    pub fit_mse: f64,
    pub restart: usize,
    pub x_opt: Vec<f64>,
    /// True function at `x_opt`.
    pub y_opt: f64,
    /// Network prediction at `x_opt`, unscaled.
    pub y_pred: f64,
    pub iterations: usize,
    pub termination: String,
    pub seconds: f64,
}

/// One CCP run kept for property checks.
#[derive(Debug, Clone)]
pub struct CcpRun {
    pub label: String,
    pub net: FeedForward,
    pub cons: ConstraintSet,
    pub trace: OptimTrace,
}

#[derive(Debug, Clone)]
pub struct Table2Report {
    pub rows: Vec<OptRow>,
    pub ccp_runs: Vec<CcpRun>,
}

pub const TABLE2_TOLS: [f64; 2] = [1e-3, 1e-5];
pub const TABLE2_MAX_ITER: usize = 200;

/// Subgradient settings per test function.
pub fn table2_subgrad(f: TestFunction) -> Vec<Method> {
    let m = |alpha0, schedule| Method::Subgrad { alpha0, schedule };
    use StepSchedule::{Constant, OverK};
    match f {
        TestFunction::Camel => vec![m(0.1, Constant), m(5.0, Constant), m(10.0, OverK)],
        TestFunction::Sumpower => vec![m(5.0, Constant), m(0.01, OverK)],
        TestFunction::Matyas => vec![m(10.0, OverK), m(10.0, Constant)],
    }
}

pub fn table2_specs(f: TestFunction, seed: u64) -> Vec<NetworkSpec> {
    let d = f.dim();
    [(Kind::Cdinn1, 30), (Kind::Cdinn2, 15), (Kind::Standard, 30)]
        .into_iter()
        .map(|(k, h)| NetworkSpec::new(k, d, vec![h]).with_seed(kind_seed(seed, k)))
        .collect()
}

/// Train each architecture with restarts, optimise every restart and report
/// the restart whose best run reached the lowest true objective.
pub fn table2(cfg: &ExperimentConfig, funcs: &[TestFunction]) -> Result<Table2Report> {
    let tcfg = cfg.train_config(3);
    let cells: Vec<(TestFunction, NetworkSpec)> = funcs
        .iter()
        .flat_map(|&f| table2_specs(f, cfg.seed).into_iter().map(move |s| (f, s)))
        .collect();
    let results = cells
        .into_par_iter()
        .map(|(f, spec)| table2_cell(f, &spec, &tcfg).map_err(|e| e.with_context(format!("table2 {}", f.name()))))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut ccp_runs = Vec::new();
    for (r, runs) in results {
        rows.extend(r);
        ccp_runs.extend(runs);
    }
    Ok(Table2Report { rows, ccp_runs })
}

fn table2_cell(f: TestFunction, spec: &NetworkSpec, tcfg: &TrainConfig) -> Result<(Vec<OptRow>, Vec<CcpRun>)> {
    let raw = default_function_data(f, tcfg.seed)?;
    let models = fit_models(spec, &raw, true, tcfg)?;
    let methods = if spec.kind == Kind::Standard { table2_subgrad(f) } else { vec![Method::Ccp] };
    let w = f.half_width();
    let mut per_model = Vec::new();
    let mut runs = Vec::new();
    for m in &models {
        let net = m.feedforward()?;
        let cons = m.constraints(&vec![-w; f.dim()], &vec![w; f.dim()], &[])?;
        let mut rows = Vec::new();
        for method in &methods {
            for &tol in &TABLE2_TOLS {
                let started = Instant::now();
                let trace = method.run(m, &cons, &f.start(), tol, TABLE2_MAX_ITER, false)?;
                let seconds = started.elapsed().as_secs_f64();
                let x_opt = m.unscale_input(trace.final_x());
                rows.push(OptRow {
                    func: f,
                    kind: spec.kind,
                    method: method.clone(),
                    tol,
                    fit_mse: m.fit_mse,
                    restart: m.restart,
                    y_opt: f.eval(&x_opt),
                    y_pred: m.unscale_output(trace.final_objective()),
                    x_opt,
                    iterations: trace.iterations(),
                    termination: trace.termination.name().into(),
                    seconds,
                });
                if *method == Method::Ccp {
                    runs.push(CcpRun {
                        label: format!("{} {} restart {} tol {tol}", f.name(), spec.kind.name(), m.restart),
                        net: net.clone(),
                        cons: cons.clone(),
                        trace,
                    });
                }
            }
        }
        per_model.push(rows);
    }
    // one network per architecture: the restart with the best optimum found
    let best = per_model
        .into_iter()
        .min_by(|a, b| best_y(a).total_cmp(&best_y(b)))
        .expect("at least one restart");
    Ok((best, runs))
}

fn best_y(rows: &[OptRow]) -> f64 {
    rows.iter().map(|r| r.y_opt).fold(f64::INFINITY, f64::min)
}

fn table2_table(rows: &[OptRow]) -> Table {
    let mut t = Table::new(
        "table2",
        &[
            "func", "type", "algorithm", "tol", "fit_mse", "params", "x_opt", "y_opt", "y_pred",
            "iterations", "termination", "restart", "exec_seconds",
        ],
    );
    for r in rows {
        t.rows.push(vec![
            r.func.label().into(),
            r.kind.label().into(),
            r.method.algorithm().into(),
            format!("{:e}", r.tol),
            fmt(r.fit_mse),
            r.method.params(),
            fmt_vec(&r.x_opt),
            format!("{:.4}", r.y_opt),
            format!("{:.4}", r.y_pred),
            r.iterations.to_string(),
            r.termination.clone(),
            r.restart.to_string(),
            format!("{:.4}", r.seconds),
        ]);
    }
    t
}

// ---------------------------------------------------------------- spill

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpillFitRow {
    pub kind: Kind,
    pub train_mse: f64,
    /// Scaled MSE on the test grid.
    pub test_mse: f64,
    pub restart: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpillOptRow {
    pub kind: Kind,
    pub method: Method,
    pub x0: Vec<f64>,
    pub x_opt: Vec<f64>,
    /// Scaled network output at `x_opt`.
    pub y_scaled: f64,
    /// True concentration at `x_opt`.
    pub y_true: f64,
    pub restart: usize,
    pub iterations: usize,
    pub termination: String,
    /// All CCP iterates satisfied the affine constraints (in original units, 1e-8).
    pub iterates_feasible: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SpillReport {
    pub fits: Vec<SpillFitRow>,
    pub opts: Vec<SpillOptRow>,
    pub ccp_runs: Vec<CcpRun>,
}

pub const SPILL_START: [f64; 2] = [1.2, 15.2];
pub const SPILL_MIN_DISTANCE: f64 = 0.35;
pub const SPILL_MIN_TIME: f64 = 5.25;
pub const SPILL_TRAIN_STEP: f64 = 0.02;
pub const SPILL_TEST_STEP: f64 = 0.05;

pub fn spill_specs(seed: u64) -> Vec<NetworkSpec> {
    [(Kind::Standard, 30), (Kind::Icnn, 30), (Kind::Cdinn1, 30), (Kind::Cdinn2, 15)]
        .into_iter()
        .map(|(k, h)| {
            let s = NetworkSpec::new(k, 2, vec![h]).with_seed(kind_seed(seed, k));
            if k == Kind::Icnn {
                s.negated()
            } else {
                s
            }
        })
        .collect()
}

/// Step sizes tried for the subgradient ascent baseline.
pub const SPILL_SUBGRAD_STEPS: [f64; 3] = [0.01, 10.0, 0.1];

/// Fit the four architectures on the spill grid and search for the
/// concentration maximum from the fixed start under `d >= 0.35, t >= 5.25`.
pub fn spill(cfg: &ExperimentConfig, params: &SpillParams) -> Result<SpillReport> {
    let raw = spill_grid(params, SPILL_TRAIN_STEP)?;
    let test_raw = spill_grid(params, SPILL_TEST_STEP)?;
    let tcfg = cfg.train_config(2);
    let cells = spill_specs(cfg.seed)
        .into_par_iter()
        .map(|spec| {
            let models = fit_models(&spec, &raw, true, &tcfg)?;
            spill_cell(&spec, models, &test_raw, params)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.with_context("spill"))?;
    let mut report = SpillReport { fits: Vec::new(), opts: Vec::new(), ccp_runs: Vec::new() };
    for (fit, opts, runs) in cells {
        report.fits.push(fit);
        report.opts.extend(opts);
        report.ccp_runs.extend(runs);
    }
    Ok(report)
}

fn spill_cell(
    spec: &NetworkSpec,
    models: Vec<FittedModel>,
    test_raw: &Dataset,
    params: &SpillParams,
) -> Result<(SpillFitRow, Vec<SpillOptRow>, Vec<CcpRun>)> {
    let methods: Vec<Method> = if spec.kind == Kind::Standard {
        SPILL_SUBGRAD_STEPS
            .iter()
            .map(|&a| Method::Subgrad { alpha0: a, schedule: StepSchedule::Constant })
            .collect()
    } else {
        vec![Method::Ccp]
    };
    let (lo, hi) = (
        [params.location_range.0, params.time_range.0],
        SPILL_START,
    );
    let rows = [
        (vec![-1.0, 0.0], -SPILL_MIN_DISTANCE),
        (vec![0.0, -1.0], -SPILL_MIN_TIME),
    ];
    let mut per_model = Vec::new();
    let mut runs = Vec::new();
    for m in &models {
        let net = m.feedforward()?;
        let cons = m.constraints(&lo, &hi, &rows)?;
        // both rows are bounds, so the clipping baseline sees them as a box
        let clip_box = m.constraints(&[SPILL_MIN_DISTANCE, SPILL_MIN_TIME], &hi, &[])?;
        let mut opts = Vec::new();
        for method in &methods {
            let started = Instant::now();
            let set = if *method == Method::Ccp { &cons } else { &clip_box };
            let trace = method.run(m, set, &SPILL_START, 1e-5, 500, true)?;
            let seconds = started.elapsed().as_secs_f64();
            let x_opt = m.unscale_input(trace.final_x());
            let feasible = trace.records.iter().all(|r| {
                let x = m.unscale_input(&r.x);
                x[0] >= SPILL_MIN_DISTANCE - 1e-8 && x[1] >= SPILL_MIN_TIME - 1e-8
            });
            opts.push(SpillOptRow {
                kind: spec.kind,
                method: method.clone(),
                x0: SPILL_START.to_vec(),
                y_true: spill_concentration(x_opt[0], x_opt[1], params),
                x_opt,
                y_scaled: trace.final_objective(),
                restart: m.restart,
                iterations: trace.iterations(),
                termination: trace.termination.name().into(),
                iterates_feasible: feasible,
                seconds,
            });
            if *method == Method::Ccp {
                runs.push(CcpRun {
                    label: format!("spill {} restart {}", spec.kind.name(), m.restart),
                    net: net.clone(),
                    cons: cons.clone(),
                    trace,
                });
            }
        }
        per_model.push((m, opts));
    }
    // keep the restart whose best search found the highest true concentration
    let (best_model, best_opts) = per_model
        .into_iter()
        .max_by(|a, b| {
            let score = |o: &[SpillOptRow]| o.iter().map(|r| r.y_true).fold(f64::NEG_INFINITY, f64::max);
            score(&a.1).total_cmp(&score(&b.1))
        })
        .expect("at least one restart");
    let ys = best_model.y_scaler.as_ref().expect("spill models are scaled");
    let test = test_raw.scaled(best_model.x_scaler.as_ref().expect("scaled"), ys)?;
    let fit = SpillFitRow {
        kind: spec.kind,
        train_mse: best_model.fit_mse,
        test_mse: mse(&best_model.net, &test)?,
        restart: best_model.restart,
    };
    Ok((fit, best_opts, runs))
}

fn spill_tables(r: &SpillReport) -> Vec<Table> {
    let mut t3 = Table::new("table3", &["network", "train_mse", "test_mse", "restart"]);
    for f in &r.fits {
        t3.rows.push(vec![f.kind.label().into(), fmt(f.train_mse), fmt(f.test_mse), f.restart.to_string()]);
    }
    let mut t4 = Table::new(
        "table4",
        &[
            "network", "method", "x0", "step", "x_opt", "y_scaled", "y_true", "iterations", "termination",
            "iterates_feasible", "exec_seconds",
        ],
    );
    for o in &r.opts {
        let step = match &o.method {
            Method::Subgrad { alpha0, .. } => alpha0.to_string(),
            Method::Ccp => "-".into(),
        };
        t4.rows.push(vec![
            o.kind.label().into(),
            o.method.algorithm().into(),
            fmt_vec(&o.x0),
            step,
            fmt_vec(&o.x_opt),
            format!("{:.4}", o.y_scaled),
            format!("{:.4}", o.y_true),
            o.iterations.to_string(),
            o.termination.clone(),
            o.iterates_feasible.to_string(),
            format!("{:.4}", o.seconds),
        ]);
    }
    vec![t3, t4]
}

// ---------------------------------------------------------------- dispatch

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Table1,
    Regression,
    Classification,
    Delay,
    Table2,
    Spill,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Table1,
        Experiment::Regression,
        Experiment::Classification,
        Experiment::Delay,
        Experiment::Table2,
        Experiment::Spill,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Table1 => "table1",
            Experiment::Regression => "regression",
            Experiment::Classification => "classification",
            Experiment::Delay => "delay",
            Experiment::Table2 => "table2",
            Experiment::Spill => "spill",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub enum Report {
    Table1(Vec<AblationRow>),
    Regression(Vec<FitRow>),
    Classification(ClassificationReport),
    Delay(DelayReport),
    Table2(Table2Report),
    Spill(SpillReport),
}

impl Report {
    pub fn tables(&self) -> Vec<Table> {
        match self {
            Report::Table1(rows) => vec![table1_table(rows)],
            Report::Regression(rows) => vec![fit_table("regression", rows)],
            Report::Classification(r) => vec![fit_table("classification_fit", &r.fits), search_table(&r.searches)],
            Report::Delay(r) => vec![delay_table(r)],
            Report::Table2(r) => vec![table2_table(&r.rows)],
            Report::Spill(r) => spill_tables(r),
        }
    }
}

/// Run one experiment end to end.
pub fn run_experiment(exp: Experiment, cfg: &ExperimentConfig) -> Result<Report> {
    let out = match exp {
        Experiment::Table1 => table1(cfg).map(Report::Table1),
        Experiment::Regression => regression(cfg).map(Report::Regression),
        Experiment::Classification => classification(cfg).map(Report::Classification),
        Experiment::Delay => delay(cfg).map(Report::Delay),
        Experiment::Table2 => table2(cfg, &TestFunction::ALL).map(Report::Table2),
        Experiment::Spill => spill(cfg, &SpillParams::default()).map(Report::Spill),
    };
    out.map_err(|e| e.with_context(format!("experiment {}", exp.name())))
}

/// Parameter count of a network, for report columns.
pub fn param_count(net: &Network) -> usize {
    net.num_params()
}
