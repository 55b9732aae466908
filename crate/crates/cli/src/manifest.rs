//! Run manifests: everything needed to regenerate a benchmark's CSVs.

use std::path::Path;

use cdinn::bench::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::io::{read_json, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub suite: String,
    pub experiments: Vec<String>,
    pub seeds: Vec<u64>,
    /// Training and restart settings; `seed` is replaced per entry of `seeds`.
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
    /// Wall-clock start, informational only.
    pub timestamp: String,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }
}
