//! Run configuration: which algorithms on which datasets, fold count, seed,
//! per-job time budget, and where the reports go.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Unreadable {
        path: String,
        source: std::io::Error,
    },

    #[error("config is not valid JSON: {0}")]
    BadJson(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error("unknown algorithm id {id:?}; known ids: {known}")]
    UnknownAlgorithm { id: String, known: String },

    #[error("bad parameters for algorithm {id:?}: {message}")]
    BadParams { id: String, message: String },
}

/// One algorithm entry: a registry id plus JSON parameters (null or an
/// object with that algorithm's keys; missing keys take defaults).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub id: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl AlgorithmSpec {
    pub fn new(id: impl Into<String>) -> AlgorithmSpec {
        AlgorithmSpec {
            id: id.into(),
            params: serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub datasets: Vec<PathBuf>,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Wall-clock budget per (algorithm, dataset, fold) job.
    #[serde(default = "default_timeout")]
    pub timeout_seconds: f64,
    pub output_dir: PathBuf,
    /// Pad ragged datasets to their longest series instead of rejecting.
    #[serde(default)]
    pub pad_ragged: bool,
    /// Variables per instance when loading CSV files (.ts files carry their
    /// own dimensionality).
    #[serde(default = "default_csv_dims")]
    pub csv_dims: usize,
}

fn default_folds() -> usize {
    5
}

fn default_timeout() -> f64 {
    86_400.0
}

fn default_csv_dims() -> usize {
    1
}

impl RunConfig {
    pub fn new(
        datasets: Vec<PathBuf>,
        algorithms: Vec<AlgorithmSpec>,
        output_dir: PathBuf,
    ) -> RunConfig {
        RunConfig {
            datasets,
            algorithms,
            folds: default_folds(),
            seed: 0,
            timeout_seconds: default_timeout(),
            output_dir,
            pad_ragged: false,
            csv_dims: default_csv_dims(),
        }
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.datasets.is_empty() {
            return Err(ConfigError::Invalid("no datasets listed".into()));
        }
        if self.algorithms.is_empty() {
            return Err(ConfigError::Invalid("no algorithms listed".into()));
        }
        if self.folds < 2 {
            return Err(ConfigError::Invalid(format!(
                "folds must be at least 2, got {}",
                self.folds
            )));
        }
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "timeout_seconds must be a positive finite number, got {}",
                self.timeout_seconds
            )));
        }
        if self.csv_dims == 0 {
            return Err(ConfigError::Invalid("csv_dims must be at least 1".into()));
        }
        Ok(())
    }
}
