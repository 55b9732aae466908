//! Command-line front end: data generation, training, optimal-input search
//! and the benchmark suites, with versioned model files and run manifests.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod model;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
pub use model::{ModelFile, MODEL_FORMAT_VERSION};

#[derive(Debug, Parser)]
#[command(name = "cdinn", version, about = "Train convex difference networks and search their inputs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated data set as CSV.
    Gen(GenArgs),
    /// Train a network on a CSV data set and save the best restart.
    Train(TrainArgs),
    /// Minimise or maximise a saved model over a box and affine constraints.
    Optimize(OptimizeArgs),
    /// Run benchmark suites and write one CSV per table.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Sine,
    Quadratic,
    Cubic,
    Circles,
    Moons,
    Camel,
    Sumpower,
    Matyas,
    Spill,
    Delay,
}

#[derive(Debug, clap::Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub func: Generator,
    /// Samples (sequences for `delay`); defaults depend on the generator.
    #[arg(long)]
    pub n: Option<usize>,
    /// Gaussian label-noise standard deviation for `circles` and `moons`.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid step for `spill`.
    #[arg(long, default_value_t = 0.02)]
    pub grid: f64,
    /// Points per axis for the test-function grids.
    #[arg(long)]
    pub points: Option<usize>,
    /// Sequence length for `delay`.
    #[arg(long, default_value_t = 5)]
    pub seq_len: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Arch {
    Standard,
    Icnn,
    Cdinn1,
    Cdinn2,
    Ricnn,
    Rcdinn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Schedule {
    Constant,
    Cosine,
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub arch: Arch,
    /// Hidden widths, comma separated (per trunk for cdinn2, state size for recurrent kinds).
    #[arg(long, default_value = "30")]
    pub hidden: String,
    #[arg(long, default_value_t = 800)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lr: f64,
    /// Minibatch size, or `full` for full-batch steps.
    #[arg(long, default_value = "32")]
    pub batch_size: String,
    #[arg(long, value_enum, default_value_t = Schedule::Cosine)]
    pub schedule: Schedule,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Pass-through connections; defaults to on for ICNNs and off otherwise.
    #[arg(long, value_enum)]
    pub passthrough: Option<Switch>,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub bias: Switch,
    /// Scale inputs and targets to [-1, 1] (pointwise data only).
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub scale: Switch,
    /// Multiply the output by -1 (a concave ICNN).
    #[arg(long)]
    pub negate: bool,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptMethod {
    Ccp,
    Subgrad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StepRule {
    #[value(alias = "constant")]
    Const,
    #[value(name = "over_k", alias = "overk")]
    OverK,
}

#[derive(Debug, clap::Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = OptMethod::Ccp)]
    pub method: OptMethod,
    /// Start point in original units, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// Stop when successive objectives (original units) differ by less than this.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha0: f64,
    #[arg(long, value_enum, default_value_t = StepRule::Const)]
    pub schedule: StepRule,
    #[arg(long, default_value_t = 0.25)]
    pub beta: f64,
    /// Box lower corner in original units; defaults to the training range.
    #[arg(long, allow_hyphen_values = true)]
    pub lower: Option<String>,
    /// Box upper corner in original units; defaults to the training range.
    #[arg(long, allow_hyphen_values = true)]
    pub upper: Option<String>,
    /// File of affine rows `g1 ... gd <= h` in original units.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    #[arg(long)]
    pub maximize: bool,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Table1,
    Table2,
    Table3,
    Table4,
    Delay,
    Regression,
    Classification,
    All,
}

#[derive(Debug, clap::Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_enum, default_value_t = Suite::All, required_unless_present = "manifest")]
    pub suite: Suite,
    #[arg(long, default_value = "bench-out")]
    pub out_dir: PathBuf,
    /// Base seeds, comma separated; each seed is a full independent run.
    #[arg(long, default_value = "0")]
    pub seeds: String,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Minibatch size, or `full`.
    #[arg(long)]
    pub batch_size: Option<String>,
    /// Re-run the experiments recorded in a manifest into `--out-dir`.
    #[arg(long, conflicts_with_all = ["suite", "seeds", "epochs", "restarts", "lr", "batch_size"])]
    pub manifest: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => commands::gen::run(&a),
        Command::Train(a) => commands::train::run(&a),
        Command::Optimize(a) => commands::optimize::run(&a),
        Command::Benchmark(a) => commands::benchmark::run(&a),
    }
}

pub(crate) fn parse_batch(s: &str) -> CliResult<Option<usize>> {
    if s == "full" {
        return Ok(None);
    }
    match s.parse::<usize>() {
        Ok(b) if b > 0 => Ok(Some(b)),
        _ => Err(CliError::usage(format!("batch size must be a positive integer or `full`, got `{s}`"))),
    }
}
