//! Declarative run and sweep manifests (TOML).
//!
//! A run manifest describes one simulation; a sweep manifest wraps a base
//! run manifest with an axis, a value grid, and the policy/group-size lists
//! to cross it with. Unknown keys are rejected so typos fail loudly.

use crate::dist::{Deterministic, MixtureModel, ShiftedExp, TaskTimeModel};
use crate::experiments::{SweepAxis, SweepSpec};
use crate::sim::{Elasticity, Policy, SimConfig};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse manifest: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid manifest: {0}")]
    Invalid(String),
}

/// One simulation, as written in a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub workers: usize,
    pub tasks: usize,
    pub group_size: usize,
    pub overhead: f64,
    pub policy: Policy,
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub elasticity: Option<ElasticitySpec>,
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
}

fn default_repetitions() -> usize {
    1
}

/// Either a list of shifted-exponential mixture components or a fixed value.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Mixture(Vec<ComponentSpec>),
    Deterministic { deterministic: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: f64,
    pub lambda: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticitySpec {
    pub rate_available: f64,
    pub rate_unavailable: f64,
}

impl DistributionSpec {
    pub fn to_model(&self) -> Result<TaskTimeModel, ManifestError> {
        match self {
            DistributionSpec::Deterministic { deterministic } => Ok(Deterministic::new(*deterministic)
                .map_err(|e| ManifestError::Invalid(e.to_string()))?
                .into()),
            DistributionSpec::Mixture(components) => {
                let parts = components
                    .iter()
                    .map(|c| {
                        ShiftedExp::new(c.lambda, c.shift).map(|d| (c.weight, d))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| ManifestError::Invalid(e.to_string()))?;
                Ok(MixtureModel::new(parts)
                    .map_err(|e| ManifestError::Invalid(e.to_string()))?
                    .into())
            }
        }
    }
}

impl RunManifest {
    pub fn from_str(text: &str) -> Result<Self, ManifestError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, ManifestError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_config(&self) -> Result<SimConfig, ManifestError> {
        let config = SimConfig {
            num_workers: self.workers,
            num_tasks: self.tasks,
            group_size: self.group_size,
            overhead: self.overhead,
            policy: self.policy,
            task_time: self.distribution.to_model()?,
            elasticity: self.elasticity.map(|e| Elasticity {
                rate_available: e.rate_available,
                rate_unavailable: e.rate_unavailable,
            }),
            seed: self.seed,
        };
        config
            .validate()
            .map_err(|e| ManifestError::Invalid(e.to_string()))?;
        Ok(config)
    }
}

/// A parameter sweep, as written in a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepManifest {
    pub axis: AxisSpec,
    pub axis_values: Vec<f64>,
    pub policies: Vec<Policy>,
    #[serde(default)]
    pub group_sizes: Vec<usize>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub base: RunManifest,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSpec {
    Overhead,
    GroupSize,
    TaskToWorkerRatio,
    Lambda,
}

impl SweepManifest {
    pub fn from_str(text: &str) -> Result<Self, ManifestError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, ManifestError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_spec(&self) -> Result<SweepSpec, ManifestError> {
        let axis = match self.axis {
            AxisSpec::Overhead => SweepAxis::Overhead,
            AxisSpec::GroupSize => SweepAxis::GroupSize,
            AxisSpec::TaskToWorkerRatio => SweepAxis::TaskToWorkerRatio,
            AxisSpec::Lambda => SweepAxis::Lambda,
        };
        Ok(SweepSpec {
            base: self.base.to_config()?,
            axis,
            axis_values: self.axis_values.clone(),
            policies: self.policies.clone(),
            group_sizes: self.group_sizes.clone(),
            repetitions: self.repetitions,
            master_seed: self.master_seed,
        })
    }
}
