//! Experiment configuration: a TOML file with CLI overrides.

use serde::Deserialize;
use std::collections::BTreeMap;

fn default_seed() -> u64 {
    42
}

/// Parsed configuration. `threads = 0` uses one worker per logical CPU;
/// experiments read their tunables from `params` with documented defaults.
#[derive(Debug, Clone, Deserialize)]
pub struct Config {
    pub experiment: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub params: toml::Table,
}

/// Errors carrying the offending field.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown experiment `{0}`; `aniso list` shows the available names")]
    UnknownExperiment(String),
    #[error("params.{field}: {reason}")]
    Field { field: String, reason: String },
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Echo of the effective configuration, for the report. The worker
    /// count is an execution parameter, not an experiment parameter, and
    /// never changes results, so it stays out of the echo (reports must be
    /// byte-identical across thread counts).
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("experiment".into(), self.experiment.clone());
        map.insert("seed".into(), self.seed.to_string());
        for (k, v) in &self.params {
            map.insert(format!("params.{k}"), v.to_string());
        }
        map
    }

    pub fn f64_or(&self, field: &str, default: f64) -> Result<f64, ConfigError> {
        match self.params.get(field) {
            None => Ok(default),
            Some(toml::Value::Float(v)) => Ok(*v),
            Some(toml::Value::Integer(v)) => Ok(*v as f64),
            Some(other) => Err(ConfigError::Field {
                field: field.into(),
                reason: format!("expected a number, got {other}"),
            }),
        }
    }

    pub fn usize_or(&self, field: &str, default: usize) -> Result<usize, ConfigError> {
        match self.params.get(field) {
            None => Ok(default),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(*v as usize),
            Some(other) => Err(ConfigError::Field {
                field: field.into(),
                reason: format!("expected a nonnegative integer, got {other}"),
            }),
        }
    }

    pub fn alphas_or(&self, field: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.params.get(field) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::Float(f) => Ok(*f),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    other => Err(ConfigError::Field {
                        field: field.into(),
                        reason: format!("expected numbers, got {other}"),
                    }),
                })
                .collect(),
            Some(other) => Err(ConfigError::Field {
                field: field.into(),
                reason: format!("expected an array of numbers, got {other}"),
            }),
        }
    }
}
