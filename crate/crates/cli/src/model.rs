//! Versioned model files.

use std::path::Path;

use cdinn::arch::{Network, NetworkSpec};
use cdinn::bench::{AffineScaler, FittedModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{read_json, write_json};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// How a saved model was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub seed: u64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: Option<usize>,
    pub restart: usize,
    pub fit_mse: f64,
    pub data: String,
}

/// A trained network on disk. Parameters are stored raw (before squaring),
/// so a loaded model trains and evaluates exactly like the saved one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub spec: NetworkSpec,
    pub network: Network,
    pub x_scaler: Option<AffineScaler>,
    pub y_scaler: Option<AffineScaler>,
    pub training: TrainingRecord,
}

impl ModelFile {
    pub fn from_fitted(model: &FittedModel, lr: f64, batch_size: Option<usize>, data: &str) -> Self {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            spec: model.net.spec().clone(),
            network: model.net.clone(),
            x_scaler: model.x_scaler.clone(),
            y_scaler: model.y_scaler.clone(),
            training: TrainingRecord {
                seed: model.seed,
                epochs: model.epochs,
                lr,
                batch_size,
                restart: model.restart,
                fit_mse: model.fit_mse,
                data: data.to_string(),
            },
        }
    }

    pub fn to_fitted(&self) -> FittedModel {
        FittedModel {
            net: self.network.clone(),
            x_scaler: self.x_scaler.clone(),
            y_scaler: self.y_scaler.clone(),
            fit_mse: self.training.fit_mse,
            restart: self.training.restart,
            seed: self.training.seed,
            epochs: self.training.epochs,
        }
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let raw: serde_json::Value = read_json(path)?;
        let version = raw.get("format_version").and_then(|v| v.as_u64());
        if version != Some(MODEL_FORMAT_VERSION as u64) {
            return Err(CliError::usage(format!(
                "{}: unsupported model format_version {:?} (expected {MODEL_FORMAT_VERSION})",
                path.display(),
                version
            )));
        }
        let m: ModelFile = serde_json::from_value(raw)
            .map_err(|e| CliError::usage(format!("{} is not a model file: {e}", path.display())))?;
        if &m.spec != m.network.spec() {
            return Err(CliError::usage(format!("{}: spec does not match the stored network", path.display())));
        }
        Ok(m)
    }
}
