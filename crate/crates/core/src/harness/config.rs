//! Experiment configuration and its validation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::labels::{EnsembleLabel, StatLabel};
use crate::rngdist::DistributionSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("config error at `{path}`: {message}")]
    Invalid { path: String, message: String },
}

/// A Monte Carlo sweep, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: String,
    pub dist: DistributionSpec,
    pub degrees: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub statistics: Vec<String>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// A validated configuration with its labels parsed.
#[derive(Clone, Debug)]
pub struct Plan {
    pub config: ExperimentConfig,
    pub ensemble: EnsembleLabel,
    pub statistics: Vec<StatLabel>,
}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.plan()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn plan(&self) -> Result<Plan, ConfigError> {
        let invalid = |path: String, message: String| ConfigError::Invalid { path, message };
        let ensemble: EnsembleLabel = self
            .ensemble
            .parse()
            .map_err(|e: super::labels::LabelError| invalid("ensemble".into(), e.0))?;
        if self.degrees.is_empty() {
            return Err(invalid("degrees".into(), "at least one degree is required".into()));
        }
        for (i, &n) in self.degrees.iter().enumerate() {
            if n == 0 {
                return Err(invalid(format!("degrees[{i}]"), "degrees must be at least 1".into()));
            }
            if n > u32::MAX as usize {
                return Err(invalid(format!("degrees[{i}]"), "degree too large".into()));
            }
            if i > 0 && n <= self.degrees[i - 1] {
                return Err(invalid(
                    format!("degrees[{i}]"),
                    "degrees must be strictly ascending".into(),
                ));
            }
        }
        if self.trials == 0 {
            return Err(invalid("trials".into(), "at least one trial is required".into()));
        }
        if self.trials > u32::MAX as usize {
            return Err(invalid("trials".into(), "too many trials".into()));
        }
        let mut statistics = Vec::with_capacity(self.statistics.len());
        for (i, s) in self.statistics.iter().enumerate() {
            let st: StatLabel = s
                .parse()
                .map_err(|e: super::labels::LabelError| invalid(format!("statistics[{i}]"), e.0))?;
            if ensemble.is_two_variable() && st.needs_roots() {
                return Err(invalid(
                    format!("statistics[{i}]"),
                    format!("`{s}` needs roots, which the two-variable ensemble does not have"),
                ));
            }
            if statistics.contains(&st) {
                return Err(invalid(format!("statistics[{i}]"), format!("`{s}` is listed twice")));
            }
            statistics.push(st);
        }
        Ok(Plan {
            config: self.clone(),
            ensemble,
            statistics,
        })
    }
}
