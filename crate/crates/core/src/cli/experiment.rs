//! Running a configured experiment.

use crate::cli::config::ExperimentConfig;
use crate::cli::export::NamedTrajectory;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::optim::OptimizerKind;
use crate::parallel::{hogwild_train, HogwildConfig};
use crate::problems::Problem;
use crate::schedule::NoiseSchedule;
use crate::train::{minimize, EarlyStopConfig, OptimizerSpec, RunConfig, StrategySet};
use crate::types::{ParamVector, Trajectory};

/// Builds the configured problem, with the configured start applied.
pub fn build_problem(config: &ExperimentConfig) -> Result<Problem> {
    let mut problem = Problem::by_name(&config.problem, &config.logreg, config.seed)?;
    if let Some(start) = &config.start {
        problem.set_start(start)?;
    }
    Ok(problem)
}

pub fn strategies(config: &ExperimentConfig) -> Result<StrategySet> {
    Ok(StrategySet {
        schedule: config.schedule,
        noise: config
            .noise
            .map(|n| NoiseSchedule::new(n.eta, n.gamma, config.seed))
            .transpose()?,
        early_stop: config.early_stop.map(|e| EarlyStopConfig {
            patience: e.patience,
            min_delta: e.min_delta,
        }),
        ordering: config.data.epoch_policy()?,
    })
}

fn run_hogwild(config: &ExperimentConfig, problem: &Problem) -> Result<Vec<NamedTrajectory>> {
    let block = config.parallel.expect("caller checked");
    let Problem::LogReg(p) = problem else {
        return Err(Error::Unsupported(format!(
            "hogwild needs the sparse `logreg` problem, not `{}`",
            problem.name()
        )));
    };
    let [entry] = config.optimizers.as_slice() else {
        return Err(Error::Unsupported("hogwild runs exactly one optimizer (sgd)".into()));
    };
    let optimizer = entry.build()?;
    if optimizer.kind != OptimizerKind::Sgd {
        return Err(Error::Unsupported(format!(
            "hogwild only runs plain sgd, not `{}`",
            optimizer.kind
        )));
    }
    let result = hogwild_train(
        p,
        &HogwildConfig {
            workers: block.workers,
            eta: optimizer.hyper.eta,
            epochs: block.epochs,
            seed: config.seed,
        },
    )?;
    let start = ParamVector::zeros(p.dim);
    let mut t = Trajectory::new();
    t.push(0, start.clone(), p.value(&start))?;
    if block.epochs > 0 {
        t.push(block.epochs * p.rows.len(), result.theta, result.final_loss)?;
    }
    Ok(vec![(entry.label().to_string(), t)])
}

/// Runs every configured optimizer from the same start point and seed.
/// Optimizers run on separate threads; results come back in config order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<NamedTrajectory>> {
    config.validate()?;
    let problem = build_problem(config)?;
    run_on(config, &problem)
}

/// [`run_experiment`] on an already-built problem.
pub fn run_on(config: &ExperimentConfig, problem: &Problem) -> Result<Vec<NamedTrajectory>> {
    if config.parallel.is_some() {
        return run_hogwild(config, problem);
    }
    let strategies = strategies(config)?;
    let run = RunConfig {
        learning_rate: None,
        max_steps: config.steps,
        seed: config.seed,
        batch_policy: config.data.batch_policy(),
        record_every: config.record_every,
    };
    let start = problem.canonical_start();
    let specs = config
        .optimizers
        .iter()
        .map(|e| Ok((e.label().to_string(), OptimizerSpec::new(e.build()?).starting_at(start.clone()))))
        .collect::<Result<Vec<_>>>()?;
    let objective = problem.objective();
    let results: Vec<Result<Trajectory>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|(_, spec)| scope.spawn(|| minimize(objective, spec, &run, &strategies)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("optimizer thread panicked"))
            .collect()
    });
    specs
        .into_iter()
        .zip(results)
        .map(|((label, _), r)| {
            r.map(|t| (label.clone(), t)).map_err(|e| match e {
                Error::Numeric { coordinate, value } => {
                    log::error!("optimizer `{label}` diverged");
                    Error::Numeric { coordinate, value }
                }
                other => other,
            })
        })
        .collect()
}

/// One-line description of a run, stored in plot metadata.
pub fn describe(config: &ExperimentConfig) -> String {
    let labels: Vec<&str> = config.optimizers.iter().map(|o| o.label()).collect();
    format!(
        "problem={} seed={} steps={} optimizers={}",
        config.problem,
        config.seed,
        config.steps,
        labels.join(",")
    )
}
