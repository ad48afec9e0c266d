//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{EpochPolicy, DEFAULT_BATCH_SIZE};
use crate::error::{Error, Result};
use crate::optim::{HyperParams, Optimizer, OptimizerKind};
use crate::problems::{LogRegParams, PROBLEM_NAMES};
use crate::schedule::ScheduleKind;
use crate::train::BatchPolicy;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "GRADBENCH_SEED";

/// One optimizer in an experiment, with optional hyperparameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerEntry {
    pub name: String,
    /// Name used in outputs; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl OptimizerEntry {
    pub fn named(name: &str) -> Self {
        OptimizerEntry {
            name: name.to_string(),
            label: None,
            eta: None,
            gamma: None,
            beta1: None,
            beta2: None,
            epsilon: None,
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    /// Resolves the name and applies overrides on top of the defaults.
    pub fn build(&self) -> Result<Optimizer> {
        let kind: OptimizerKind = self.name.parse()?;
        let d = HyperParams::defaults(kind);
        let hyper = HyperParams {
            eta: self.eta.unwrap_or(d.eta),
            gamma: self.gamma.unwrap_or(d.gamma),
            beta1: self.beta1.unwrap_or(d.beta1),
            beta2: self.beta2.unwrap_or(d.beta2),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
        };
        Optimizer::with_hyper(kind, hyper)
            .map_err(|e| Error::config(format!("optimizer `{}`: {e}", self.label())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BatchMode {
    #[default]
    Full,
    Single,
    Minibatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataBlock {
    pub batch: BatchMode,
    pub batch_size: usize,
    /// `in_order`, `shuffle`, `sorted` or `mixed`.
    pub policy: String,
    /// Block length for the `mixed` policy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
}

impl Default for DataBlock {
    fn default() -> Self {
        DataBlock {
            batch: BatchMode::Full,
            batch_size: DEFAULT_BATCH_SIZE,
            policy: "shuffle".into(),
            block: None,
        }
    }
}

impl DataBlock {
    pub fn batch_policy(&self) -> BatchPolicy {
        match self.batch {
            BatchMode::Full => BatchPolicy::Full,
            BatchMode::Single => BatchPolicy::Single,
            BatchMode::Minibatch => BatchPolicy::MiniBatch(self.batch_size),
        }
    }

    pub fn epoch_policy(&self) -> Result<EpochPolicy> {
        Ok(match self.policy.parse()? {
            EpochPolicy::Mixed { .. } => EpochPolicy::Mixed { block: self.block },
            p => p,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBlock {
    pub eta: f64,
    #[serde(default = "default_noise_gamma")]
    pub gamma: f64,
}

fn default_noise_gamma() -> f64 {
    0.55
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStopBlock {
    pub patience: usize,
    #[serde(default)]
    pub min_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParallelMode {
    Hogwild,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelBlock {
    pub mode: ParallelMode,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_workers() -> usize {
    4
}

fn default_epochs() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

/// Contour rendering options. Unset fields come from the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourBlock {
    pub resolution: usize,
    pub levels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_levels: Option<bool>,
}

impl Default for ContourBlock {
    fn default() -> Self {
        ContourBlock {
            resolution: 120,
            levels: 24,
            log_levels: None,
        }
    }
}

fn default_record_every() -> usize {
    1
}

/// One experiment: a problem, the optimizers to compare, and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    /// Start point for surface problems; defaults to the canonical start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    pub optimizers: Vec<OptimizerEntry>,
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub schedule: ScheduleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<EarlyStopBlock>,
    #[serde(default)]
    pub data: DataBlock,
    #[serde(default)]
    pub logreg: LogRegParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<ParallelBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub contour: ContourBlock,
}

impl ExperimentConfig {
    /// A minimal config running `optimizers` on `problem`.
    pub fn new(problem: &str, optimizers: &[&str], steps: usize) -> Self {
        ExperimentConfig {
            problem: problem.to_string(),
            start: None,
            optimizers: optimizers.iter().map(|n| OptimizerEntry::named(n)).collect(),
            steps,
            seed: 0,
            record_every: 1,
            schedule: ScheduleKind::Constant,
            noise: None,
            early_stop: None,
            data: DataBlock::default(),
            logreg: LogRegParams::default(),
            parallel: None,
            output: OutputBlock::default(),
            contour: ContourBlock::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces the seed with `GRADBENCH_SEED` when that variable is set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("{SEED_ENV} must be an unsigned integer, got `{raw}`")))?;
        }
        Ok(())
    }

    /// Checks names and ranges without building anything expensive.
    pub fn validate(&self) -> Result<()> {
        if !PROBLEM_NAMES.contains(&self.problem.as_str()) {
            return Err(Error::config(format!(
                "unknown problem `{}`; valid names: {}",
                self.problem,
                PROBLEM_NAMES.join(", ")
            )));
        }
        if self.optimizers.is_empty() {
            return Err(Error::config("config lists no optimizers"));
        }
        for entry in &self.optimizers {
            entry.build()?;
        }
        let mut labels: Vec<&str> = self.optimizers.iter().map(|o| o.label()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config(format!(
                "optimizer label `{}` appears twice; set distinct `label` fields",
                w[0]
            )));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every must be positive"));
        }
        self.schedule.validate()?;
        self.data.epoch_policy()?;
        if self.data.batch == BatchMode::Minibatch && self.data.batch_size == 0 {
            return Err(Error::config("data.batch_size must be positive"));
        }
        if let Some(p) = &self.parallel {
            if p.workers == 0 {
                return Err(Error::config("parallel.workers must be positive"));
            }
        }
        if self.contour.resolution < 16 {
            return Err(Error::config("contour.resolution must be at least 16"));
        }
        if self.contour.levels < 3 {
            return Err(Error::config("contour.levels must be at least 3"));
        }
        Ok(())
    }
}
