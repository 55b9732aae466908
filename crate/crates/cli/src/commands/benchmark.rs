use std::path::{Path, PathBuf};
use std::time::Instant;

use cdinn::bench::{run_experiment, Experiment, ExperimentConfig, Report, Table};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{write_csv, write_json};
use crate::manifest::RunManifest;
use crate::{parse_batch, BenchmarkArgs, Suite};

/// Outcome of one experiment at one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub seed: u64,
    pub experiment: String,
    pub ok: bool,
    pub error: Option<String>,
    pub seconds: f64,
    pub tables: Vec<String>,
    /// Delay only: recurrent CDiNN test MSE over recurrent ICNN test MSE.
    pub delay_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub suite: String,
    pub failed: usize,
    pub runs: Vec<ExperimentSummary>,
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Table1 => "table1",
        Suite::Table2 => "table2",
        Suite::Table3 => "table3",
        Suite::Table4 => "table4",
        Suite::Delay => "delay",
        Suite::Regression => "regression",
        Suite::Classification => "classification",
        Suite::All => "all",
    }
}

/// Experiments a suite runs and the tables it keeps (`None` keeps all).
fn suite_plan(suite: &str) -> CliResult<(Vec<Experiment>, Option<&'static str>)> {
    Ok(match suite {
        "all" => (Experiment::ALL.to_vec(), None),
        "table3" => (vec![Experiment::Spill], Some("table3")),
        "table4" => (vec![Experiment::Spill], Some("table4")),
        other => (vec![other.parse::<Experiment>()?], None),
    })
}

fn seed_dir(out: &Path, seed: u64, multi: bool) -> PathBuf {
    if multi {
        out.join(format!("seed_{seed}"))
    } else {
        out.to_path_buf()
    }
}

fn write_table(dir: &Path, t: &Table) -> CliResult<PathBuf> {
    let path = dir.join(format!("{}.csv", t.name));
    write_csv(&path, &t.header, &t.rows)?;
    Ok(path)
}

pub fn run(a: &BenchmarkArgs) -> CliResult<()> {
    let manifest = match &a.manifest {
        Some(p) => RunManifest::load(p)?,
        None => {
            let mut config = ExperimentConfig::default();
            if let Some(e) = a.epochs {
                config.epochs = e;
            }
            if a.restarts == Some(0) {
                return Err(CliError::usage("--restarts must be at least 1"));
            }
            config.restarts = a.restarts.or(config.restarts);
            if let Some(lr) = a.lr {
                config.lr = lr;
            }
            if let Some(b) = &a.batch_size {
                config.batch_size = parse_batch(b)?;
            }
            let seeds = a
                .seeds
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| CliError::usage(format!("--seeds: bad seed `{s}`"))))
                .collect::<CliResult<Vec<_>>>()?;
            let suite = suite_name(a.suite).to_string();
            let (exps, _) = suite_plan(&suite)?;
            RunManifest {
                toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                suite,
                experiments: exps.iter().map(|e| e.name().to_string()).collect(),
                seeds,
                config,
                outputs: Vec::new(),
                timestamp: chrono::Utc::now().to_rfc3339(),
            }
        }
    };
    execute(manifest, &a.out_dir)
}

/// Run everything a manifest describes into `out`, then write the manifest
/// (with its output list) and `summary.json`.
pub fn execute(mut manifest: RunManifest, out: &Path) -> CliResult<()> {
    if manifest.seeds.is_empty() {
        return Err(CliError::usage("no seeds to run"));
    }
    let (_, keep) = suite_plan(&manifest.suite)?;
    let exps = manifest
        .experiments
        .iter()
        .map(|e| e.parse::<Experiment>().map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::usage(format!("cannot create {}: {e}", out.display())))?;
    let multi = manifest.seeds.len() > 1;
    let mut runs = Vec::new();
    let mut outputs = Vec::new();
    for &seed in &manifest.seeds {
        let dir = seed_dir(out, seed, multi);
        let cfg = ExperimentConfig { seed, ..manifest.config.clone() };
        for &exp in &exps {
            let start = Instant::now();
            let result = run_experiment(exp, &cfg);
            let seconds = start.elapsed().as_secs_f64();
            let mut summary = ExperimentSummary {
                seed,
                experiment: exp.name().to_string(),
                ok: true,
                error: None,
                seconds,
                tables: Vec::new(),
                delay_ratio: None,
            };
            match result {
                Ok(report) => {
                    if let Report::Delay(d) = &report {
                        println!(
                            "delay seed {seed}: ricnn test mse {:.6e}, rcdinn test mse {:.6e}, ratio {:.3e}",
                            d.ricnn_test_mse,
                            d.rcdinn_test_mse,
                            d.ratio()
                        );
                        summary.delay_ratio = Some(d.ratio());
                    }
                    for t in report.tables().iter().filter(|t| keep.is_none_or(|k| k == t.name)) {
                        let path = write_table(&dir, t)?;
                        let rel = path.strip_prefix(out).unwrap_or(&path).display().to_string();
                        summary.tables.push(t.name.clone());
                        outputs.push(rel);
                    }
                    println!("{} seed {seed}: ok in {seconds:.1}s", exp.name());
                }
                Err(e) => {
                    eprintln!("{} seed {seed}: failed: {e}", exp.name());
                    summary.ok = false;
                    summary.error = Some(e.to_string());
                }
            }
            runs.push(summary);
        }
    }
    manifest.outputs = outputs;
    manifest.save(&out.join("manifest.json"))?;
    let failed = runs.iter().filter(|r| !r.ok).count();
    write_json(&out.join("summary.json"), &Summary { suite: manifest.suite.clone(), failed, runs })?;
    if failed > 0 {
        return Err(CliError::Runtime(anyhow::anyhow!("{failed} experiment run(s) failed; see summary.json")));
    }
    Ok(())
}
