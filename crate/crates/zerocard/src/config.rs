// Copyright 2026 The Zerocard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Run configuration: one JSON file, overridable from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zerocard_core::model::{Ablation, HyperParams};
use zerocard_core::training::TrainConfig;

use crate::error::{CliError, Result};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "ZEROCARD_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory of `<table>.csv` files.
    pub tables: Option<PathBuf>,
    /// Directory of `<table>.json` schema files.
    pub schema: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub workload: Option<PathBuf>,
    /// Output file of the command (manifest, report, loss history).
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub hyper: HyperParams,
    pub train: TrainConfig,
    pub seed: u64,
    pub ablation: Option<Ablation>,
    pub queries_per_table: usize,
    pub histogram_buckets: usize,
    pub sample_rate: f64,
    /// Tables produced by `synth`.
    pub synth_tables: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: Paths::default(),
            hyper: HyperParams::default(),
            train: TrainConfig::default(),
            seed: 0,
            ablation: None,
            queries_per_table: 200,
            histogram_buckets: zerocard_core::baselines::MAX_BUCKETS,
            sample_rate: 0.01,
            synth_tables: 3,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Hyperparameters with the configured ablation applied.
    pub fn effective_hyper(&self) -> HyperParams {
        match self.ablation {
            Some(a) => self.hyper.clone().with_ablation(a),
            None => self.hyper.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |e: zerocard_core::Error| CliError::Config(e.to_string());
        self.effective_hyper().validate().map_err(invalid)?;
        self.train.validate().map_err(invalid)?;
        if self.histogram_buckets == 0
            || self.histogram_buckets > zerocard_core::baselines::MAX_BUCKETS
        {
            return Err(CliError::Config(format!(
                "histogram_buckets must lie in 1..={}",
                zerocard_core::baselines::MAX_BUCKETS
            )));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(CliError::Config("sample_rate must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// The path stored in `field`, or a configuration error naming `flag`.
pub fn require<'a>(field: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    field.as_deref().ok_or_else(|| {
        CliError::Config(format!(
            "missing path: pass {flag} or set it in the config file"
        ))
    })
}
