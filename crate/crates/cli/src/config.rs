//! Experiment configuration: defaults, file loading, and flag overrides.
//!
//! Configs load from TOML or JSON (by extension); every command-line flag
//! overrides the file value. Each results file embeds its fully resolved
//! config as a single `# config = {...}` JSON line so a run can be
//! reproduced from its own output.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use longtail::dist::{ClassPriors, GaussianTask, ProfileKind};
use longtail::loss::MarginSpec;
use longtail::train::{OptimizerConfig, OptimizerKind};

/// Binary Gaussian task parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskConfig {
    pub mean_plus: [f64; 2],
    pub mean_minus: [f64; 2],
    pub sigma: f64,
    pub prior_plus: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self { mean_plus: [1.0, 1.0], mean_minus: [-1.0, -1.0], sigma: 1.0, prior_plus: 0.05 }
    }
}

impl TaskConfig {
    pub fn build(&self) -> Result<GaussianTask> {
        Ok(GaussianTask::new(self.mean_plus, self.mean_minus, self.sigma, self.prior_plus)?)
    }
}

/// Optimizer settings shared by every trial; the per-trial seed is derived
/// from the experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    pub algorithm: OptimizerKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            algorithm: OptimizerKind::sgd_momentum(),
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 128,
            weight_decay: 0.0,
        }
    }
}

impl OptimizerSettings {
    pub fn with_seed(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            kind: self.algorithm,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            weight_decay: self.weight_decay,
            seed,
        }
    }
}

/// One in-training loss to compare, by name plus optional parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau2: Option<f64>,
}

impl MethodConfig {
    pub fn named(name: &str) -> Self {
        Self { name: name.to_string(), tau: None, tau1: None, tau2: None }
    }

    /// Label used in result rows: the method name, no parameters.
    pub fn label(&self) -> &str {
        &self.name
    }

    pub fn tau_or_default(&self) -> f64 {
        self.tau.unwrap_or(1.0)
    }

    pub fn build(&self, priors: &ClassPriors) -> Result<MarginSpec> {
        Ok(match self.name.as_str() {
            "erm" => MarginSpec::erm(priors.num_classes()),
            "balanced" => MarginSpec::balanced(priors),
            "adaptive" => MarginSpec::adaptive(priors),
            "equalised" => MarginSpec::equalised(priors, self.tau_or_default()),
            "logit_adjusted" => MarginSpec::logit_adjusted(priors, self.tau_or_default()),
            "combined" => MarginSpec::combined(priors, self.tau_or_default()),
            "interpolated" => MarginSpec::interpolated(
                priors,
                self.tau1.unwrap_or(1.0),
                self.tau2.unwrap_or(1.0),
            ),
            other => bail!(
                "unknown method `{other}` (expected erm, balanced, adaptive, equalised, \
                 logit_adjusted, combined, or interpolated)"
            ),
        })
    }
}

fn default_methods() -> Vec<MethodConfig> {
    ["erm", "adaptive", "equalised", "logit_adjusted"]
        .iter()
        .map(|n| MethodConfig::named(n))
        .collect()
}

fn default_tau_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 * 0.25).collect()
}

const fn default_true() -> bool {
    true
}

/// Config for the `synthetic` command: train every method per trial and
/// compare balanced errors against the Bayes oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub task: TaskConfig,
    pub methods: Vec<MethodConfig>,
    pub optimizer: OptimizerSettings,
    pub n_train: usize,
    pub n_test: usize,
    pub n_trials: usize,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub timestamp: bool,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            task: TaskConfig::default(),
            methods: default_methods(),
            optimizer: OptimizerSettings::default(),
            n_train: 10_000,
            n_test: 10_000,
            n_trials: 100,
            seed: 20_240_901,
            timestamp: true,
        }
    }
}

/// Config for the `tau-sweep` command: one ERM model per trial, then every
/// post-hoc correction evaluated across the tau grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TauSweepConfig {
    pub task: TaskConfig,
    pub optimizer: OptimizerSettings,
    pub n_train: usize,
    pub n_test: usize,
    pub n_trials: usize,
    pub tau_grid: Vec<f64>,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub timestamp: bool,
}

impl Default for TauSweepConfig {
    fn default() -> Self {
        Self {
            task: TaskConfig::default(),
            optimizer: OptimizerSettings::default(),
            n_train: 10_000,
            n_test: 10_000,
            n_trials: 100,
            tau_grid: default_tau_grid(),
            seed: 20_240_902,
            timestamp: true,
        }
    }
}

/// Config for the `weightnorm-study` command: a multiclass long-tail
/// mixture trained with both optimizers, reporting per-class weight norms
/// and their correlation with class counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightNormConfig {
    pub num_classes: usize,
    pub profile: ProfileKind,
    pub max_count: u64,
    pub imbalance_ratio: f64,
    /// Class means sit equally spaced on this circle in 2D.
    pub mean_radius: f64,
    pub sigma: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub sgd_learning_rate: f64,
    pub sgd_momentum: f64,
    pub adam_learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub timestamp: bool,
}

impl Default for WeightNormConfig {
    fn default() -> Self {
        Self {
            num_classes: 10,
            profile: ProfileKind::Exp,
            max_count: 1000,
            imbalance_ratio: 100.0,
            mean_radius: 3.0,
            sigma: 1.0,
            epochs: 200,
            batch_size: 128,
            sgd_learning_rate: 0.1,
            sgd_momentum: 0.9,
            adam_learning_rate: 0.01,
            weight_decay: 0.0,
            seed: 20_240_903,
            timestamp: true,
        }
    }
}

/// Config for the `binary-curves` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinaryCurvesConfig {
    pub pi: f64,
    pub gammas: Vec<f64>,
    pub grid_points: usize,
    pub score_min: f64,
    pub score_max: f64,
    pub normalized: bool,
    #[serde(default = "default_true")]
    pub timestamp: bool,
}

impl Default for BinaryCurvesConfig {
    fn default() -> Self {
        Self {
            pi: 0.2,
            gammas: vec![1.0, 8.0],
            grid_points: 200,
            score_min: -5.0,
            score_max: 5.0,
            normalized: true,
            timestamp: true,
        }
    }
}

/// Config for the `consistency` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsistencyConfig {
    pub num_distributions: usize,
    pub max_instances: usize,
    pub max_classes: usize,
    pub witness_tries: usize,
    pub seed: u64,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        Self {
            num_distributions: 150,
            max_instances: 5,
            max_classes: 4,
            witness_tries: 10_000,
            seed: 20_240_904,
        }
    }
}

/// Loads a config from a TOML or JSON file, by extension.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).context("parsing JSON config"),
        _ => toml::from_str(&text).context("parsing TOML config"),
    }
}
