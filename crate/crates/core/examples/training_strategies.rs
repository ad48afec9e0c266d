//! Mini-batch SGD on sparse logistic regression with each training
//! strategy switched on in turn.
//!
//! cargo run --release --example training_strategies

use gradbench::data::EpochPolicy;
use gradbench::problems::SparseLogReg;
use gradbench::schedule::{NoiseSchedule, ScheduleKind};
use gradbench::train::EarlyStopConfig;
use gradbench::{minimize, BatchPolicy, Objective, OptimizerKind, OptimizerSpec, RunConfig, StrategySet};

fn main() -> gradbench::Result<()> {
    let problem = SparseLogReg::generate(4000, 300, 0.02, 1)?;
    let cfg = RunConfig::new(4000)
        .with_learning_rate(0.5)
        .with_seed(1)
        .with_batch_policy(BatchPolicy::MiniBatch(50))
        .with_record_every(80);
    let spec = OptimizerSpec::of(OptimizerKind::Sgd);

    let base = StrategySet::none();
    let variants = [
        ("shuffle", base),
        ("in order", StrategySet { ordering: EpochPolicy::InOrder, ..base }),
        ("curriculum", StrategySet { ordering: EpochPolicy::Sorted, ..base }),
        ("mixed", StrategySet { ordering: EpochPolicy::Mixed { block: None }, ..base }),
        ("step decay", StrategySet { schedule: ScheduleKind::StepDecay { drop: 0.5, every_k: 800 }, ..base }),
        ("1/t", StrategySet { schedule: ScheduleKind::InverseT { k: 0.01 }, ..base }),
        (
            "anneal",
            StrategySet {
                schedule: ScheduleKind::ThresholdAnneal { factor: 0.5, min_improvement: 1e-3 },
                ..base
            },
        ),
        ("noise", StrategySet { noise: Some(NoiseSchedule::new(0.01, 0.55, 1)?), ..base }),
        (
            "early stop",
            StrategySet {
                early_stop: Some(EarlyStopConfig { patience: 3, min_delta: 1e-4 }),
                ..base
            },
        ),
    ];

    println!("{:<11} {:>6} {:>11} {:>11}", "strategy", "steps", "train loss", "valid loss");
    for (name, strategies) in variants {
        let t = minimize(&problem, &spec, &cfg, &strategies)?;
        let last = t.last().unwrap();
        println!(
            "{name:<11} {:>6} {:>11.5} {:>11.5}",
            last.step,
            problem.value(&last.theta),
            problem.validation_value(&last.theta)
        );
    }
    Ok(())
}
