//! The sequential training loop.
//!
//! Each step runs in a fixed order: assemble the batch, compute the
//! gradient, add gradient noise, take an optimizer step at the scheduled
//! learning rate, record, then check early stopping.

use crate::data::{make_batches, make_epoch_plan, EpochPolicy};
use crate::error::{check_dim, Error, Result};
use crate::objective::Objective;
use crate::optim::{Optimizer, OptimizerKind};
use crate::schedule::{apply_noise, EarlyStopState, LrSchedule, NoiseSchedule, ScheduleKind, StopDecision};
use crate::types::{GradientSample, ParamVector, Trajectory};

/// Above this many examples, stochastic runs record the batch loss instead
/// of the full-dataset loss.
pub const FULL_LOSS_LIMIT: usize = 10_000;

/// Which examples feed each gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchPolicy {
    /// Whole objective per step.
    #[default]
    Full,
    /// One example per step.
    Single,
    /// `n` examples per step.
    MiniBatch(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Base learning rate. `None` uses the optimizer's own default.
    pub learning_rate: Option<f64>,
    pub max_steps: usize,
    pub seed: u64,
    pub batch_policy: BatchPolicy,
    pub record_every: usize,
}

impl RunConfig {
    pub fn new(max_steps: usize) -> Self {
        RunConfig {
            learning_rate: None,
            max_steps,
            seed: 0,
            batch_policy: BatchPolicy::Full,
            record_every: 1,
        }
    }

    pub fn with_learning_rate(mut self, eta: f64) -> Self {
        self.learning_rate = Some(eta);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_batch_policy(mut self, policy: BatchPolicy) -> Self {
        self.batch_policy = policy;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    fn validate(&self, objective: &dyn Objective) -> Result<()> {
        if let Some(eta) = self.learning_rate {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::config(format!("learning rate must be positive, got {eta}")));
            }
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every must be positive"));
        }
        let n = objective.n_examples();
        match self.batch_policy {
            BatchPolicy::Full => Ok(()),
            BatchPolicy::Single | BatchPolicy::MiniBatch(_) if n == 0 => Err(Error::config(format!(
                "objective `{}` has no examples; use the full batch policy",
                objective.name()
            ))),
            BatchPolicy::MiniBatch(b) if b == 0 || b > n => Err(Error::config(format!(
                "mini-batch size must lie in [1, {n}], got {b}"
            ))),
            _ => Ok(()),
        }
    }
}

/// An optimizer and an optional start point.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSpec {
    pub optimizer: Optimizer,
    /// Start point; `None` uses the objective's own.
    pub initial: Option<ParamVector>,
}

impl OptimizerSpec {
    pub fn new(optimizer: Optimizer) -> Self {
        OptimizerSpec {
            optimizer,
            initial: None,
        }
    }

    pub fn of(kind: OptimizerKind) -> Self {
        Self::new(Optimizer::new(kind))
    }

    pub fn starting_at(mut self, theta: ParamVector) -> Self {
        self.initial = Some(theta);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStopConfig {
    pub patience: usize,
    pub min_delta: f64,
}

/// Optional training strategies layered on the loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrategySet {
    pub schedule: ScheduleKind,
    pub noise: Option<NoiseSchedule>,
    pub early_stop: Option<EarlyStopConfig>,
    /// Example ordering for stochastic batch policies.
    pub ordering: EpochPolicy,
}

impl StrategySet {
    pub fn none() -> Self {
        StrategySet::default()
    }
}

fn recorded_loss(
    objective: &dyn Objective,
    theta: &ParamVector,
    batch: Option<&[usize]>,
) -> Result<f64> {
    match batch {
        Some(b) if objective.n_examples() > FULL_LOSS_LIMIT => objective.value_on(theta, b),
        _ => Ok(objective.value(theta)),
    }
}

/// Runs `spec` on `objective` and returns the recorded trajectory.
///
/// Entry 0 is the start point. Entries are recorded every
/// `record_every` steps, at the final step, and when early stopping fires.
/// An epoch is one pass over the examples (one step under the full batch
/// policy); learning-rate annealing and early stopping are evaluated at
/// epoch ends.
pub fn minimize(
    objective: &dyn Objective,
    spec: &OptimizerSpec,
    config: &RunConfig,
    strategies: &StrategySet,
) -> Result<Trajectory> {
    config.validate(objective)?;
    let optimizer = &spec.optimizer;
    optimizer.hyper.validate()?;
    let dim = objective.dim();
    let mut theta = spec
        .initial
        .clone()
        .unwrap_or_else(|| objective.initial_point());
    check_dim(dim, theta.dim())?;

    let base_eta = config.learning_rate.unwrap_or(optimizer.hyper.eta);
    let mut schedule = LrSchedule::new(strategies.schedule, base_eta)?;
    let mut early = strategies
        .early_stop
        .map(|c| EarlyStopState::new(c.patience).map(|s| s.with_min_delta(c.min_delta)))
        .transpose()?;
    let n = objective.n_examples();
    let ordering = strategies.ordering;
    let difficulty = |i: usize| objective.difficulty(i).unwrap_or(0.0);
    let has_difficulty = n > 0 && objective.difficulty(0).is_some();

    let mut trajectory = Trajectory::new();
    let mut epoch_loss = objective.value(&theta);
    trajectory.push(0, theta.clone(), recorded_loss(objective, &theta, None)?)?;

    let mut state = optimizer.init_state(dim);
    let mut t = 0usize;
    let mut epoch = 0usize;
    let mut improvement: Option<f64> = None;

    'epochs: while t < config.max_steps {
        let batches: Vec<Option<Vec<usize>>> = match config.batch_policy {
            BatchPolicy::Full => vec![None],
            BatchPolicy::Single | BatchPolicy::MiniBatch(_) => {
                let size = match config.batch_policy {
                    BatchPolicy::MiniBatch(b) => b,
                    _ => 1,
                };
                let plan = make_epoch_plan(
                    n,
                    ordering,
                    has_difficulty.then_some(&difficulty as &dyn Fn(usize) -> f64),
                    config.seed,
                    epoch,
                )?;
                make_batches(&plan, size)?.batches.into_iter().map(Some).collect()
            }
        };
        let last = batches.len() - 1;
        for (k, batch) in batches.iter().enumerate() {
            if t >= config.max_steps {
                break 'epochs;
            }
            let step_index = t;
            let mut grad_fn = |p: &ParamVector| -> Result<GradientSample> {
                let g = match batch {
                    None => objective.grad(p),
                    Some(b) => objective.grad_on(p, b)?,
                };
                Ok(match &strategies.noise {
                    Some(noise) => apply_noise(&g, noise, step_index),
                    None => g,
                })
            };
            let eta = schedule.lr_at(t, improvement.take());
            let (next_state, next_theta) = optimizer.step(&state, &theta, eta, &mut grad_fn)?;
            state = next_state;
            theta = next_theta;
            t += 1;

            let mut stop = false;
            if k == last {
                let end_loss = objective.value(&theta);
                improvement = Some(epoch_loss - end_loss);
                epoch_loss = end_loss;
                if let Some(es) = early.as_mut() {
                    let (next, decision) = es.observe(t, objective.validation_value(&theta));
                    *es = next;
                    stop = decision == StopDecision::Stop;
                }
            }
            if t.is_multiple_of(config.record_every) || t == config.max_steps || stop {
                let loss = recorded_loss(objective, &theta, batch.as_deref())?;
                trajectory.push(t, theta.clone(), loss)?;
            }
            if stop {
                break 'epochs;
            }
        }
        epoch += 1;
    }
    Ok(trajectory)
}
