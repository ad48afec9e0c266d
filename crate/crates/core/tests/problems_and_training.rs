use gradbench::objective::{CountingObjective, Objective};
use gradbench::optim::{Optimizer, OptimizerKind};
use gradbench::problems::{gradcheck, sample_points, Beale, SparseLogReg};
use gradbench::schedule::{NoiseSchedule, ScheduleKind};
use gradbench::train::{minimize, BatchPolicy, EarlyStopConfig, OptimizerSpec, RunConfig, StrategySet};
use gradbench::data::EpochPolicy;
use gradbench::types::{GradientSample, ParamVector};
use proptest::prelude::*;

/// `½ Σ c_i x_i²` with positive curvatures.
struct Diagonal(Vec<f64>);

impl Objective for Diagonal {
    fn name(&self) -> &str {
        "diagonal"
    }
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn value(&self, theta: &[f64]) -> f64 {
        0.5 * theta.iter().zip(&self.0).map(|(x, c)| c * x * x).sum::<f64>()
    }
    fn grad(&self, theta: &[f64]) -> GradientSample {
        GradientSample::Dense(theta.iter().zip(&self.0).map(|(x, c)| c * x).collect())
    }
}

#[test]
fn logreg_gradient_matches_central_differences() {
    let p = SparseLogReg::generate(200, 30, 0.1, 7).unwrap();
    let h = 1e-5;
    for theta in sample_points(30, -1.0, 1.0, 50, 104) {
        let analytic = p.grad(&theta).to_dense();
        let scale = analytic.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        let mut probe = theta.to_vec();
        for i in 0..30 {
            probe[i] = theta[i] + h;
            let plus = p.value(&probe);
            probe[i] = theta[i] - h;
            let minus = p.value(&probe);
            probe[i] = theta[i];
            let numeric = (plus - minus) / (2.0 * h);
            assert!((analytic[i] - numeric).abs() <= 1e-6 * scale, "coordinate {i}");
        }
    }
    let r = gradcheck(&p, &sample_points(30, -1.0, 1.0, 100, 104), h).unwrap();
    assert!(r.max_rel_error < 1e-5, "{}", r.max_rel_error);
}

#[test]
fn full_gradient_is_mean_of_example_gradients() {
    let p = SparseLogReg::generate(500, 80, 0.05, 3).unwrap();
    let theta = sample_points(80, -1.0, 1.0, 1, 8).pop().unwrap();
    let full = p.grad(&theta).to_dense();
    let mut mean = vec![0.0; 80];
    for i in 0..p.rows.len() {
        for (j, v) in p.example_grad(&theta, i).iter() {
            mean[j] += v / p.rows.len() as f64;
        }
    }
    for (a, b) in full.iter().zip(&mean) {
        assert!((a - b).abs() <= 1e-12);
    }
    let all: Vec<usize> = (0..p.rows.len()).collect();
    let batch = p.grad_on(&theta, &all).unwrap().to_dense();
    for (a, b) in full.iter().zip(&batch) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn example_gradient_support_is_row_support() {
    let p = SparseLogReg::generate(100, 50, 0.1, 5).unwrap();
    let theta = vec![0.3; 50];
    for i in 0..p.rows.len() {
        let g = p.example_grad(&theta, i);
        let support: Vec<usize> = g.iter().map(|(j, _)| j).collect();
        assert!(support.iter().all(|j| p.rows[i].indices.contains(j)));
    }
    assert!(p.grad_on(&theta, &[]).is_err());
}

#[test]
fn dataset_generation_is_byte_identical() {
    let write = || {
        let mut out = Vec::new();
        SparseLogReg::generate(300, 60, 0.05, 12).unwrap().write_dataset(&mut out).unwrap();
        out
    };
    assert_eq!(write(), write());
}

#[test]
fn recorded_loss_equals_objective_value() {
    let b = Beale::default();
    for kind in OptimizerKind::ALL {
        let t = minimize(&b, &OptimizerSpec::of(kind), &RunConfig::new(50), &StrategySet::none()).unwrap();
        for e in t.entries() {
            assert!((e.loss - b.value(&e.theta)).abs() <= 1e-12);
        }
    }
}

#[test]
fn minimize_is_deterministic_with_all_strategies() {
    let p = SparseLogReg::generate(400, 60, 0.05, 2).unwrap();
    let strategies = StrategySet {
        schedule: ScheduleKind::ThresholdAnneal {
            factor: 0.5,
            min_improvement: 1e-3,
        },
        noise: Some(NoiseSchedule::new(0.01, 0.55, 3).unwrap()),
        early_stop: Some(EarlyStopConfig {
            patience: 3,
            min_delta: 0.0,
        }),
        ordering: EpochPolicy::Mixed { block: None },
    };
    let cfg = RunConfig::new(300)
        .with_seed(11)
        .with_learning_rate(0.2)
        .with_batch_policy(BatchPolicy::MiniBatch(20));
    let run = || minimize(&p, &OptimizerSpec::of(OptimizerKind::Sgd), &cfg, &strategies).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert!(a.last().unwrap().loss < std::f64::consts::LN_2);
}

#[test]
fn noise_changes_the_path() {
    let b = Beale::default();
    let cfg = RunConfig::new(20);
    let spec = OptimizerSpec::of(OptimizerKind::Adam);
    let plain = minimize(&b, &spec, &cfg, &StrategySet::none()).unwrap();
    let mut s = StrategySet::none();
    s.noise = Some(NoiseSchedule::new(0.1, 0.55, 1).unwrap());
    let noisy = minimize(&b, &spec, &cfg, &s).unwrap();
    assert_ne!(plain.last().unwrap().theta, noisy.last().unwrap().theta);
}

#[test]
fn single_example_policy_draws_one_gradient_per_step() {
    let p = SparseLogReg::generate(50, 20, 0.1, 1).unwrap();
    let counting = CountingObjective::new(&p);
    let cfg = RunConfig::new(120).with_batch_policy(BatchPolicy::Single).with_learning_rate(0.1);
    let t = minimize(&counting, &OptimizerSpec::of(OptimizerKind::Adagrad), &cfg, &StrategySet::none()).unwrap();
    assert_eq!(counting.grad_calls(), 120);
    assert_eq!(t.len(), 121);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sgd_distance_to_minimum_is_monotone(
        curv in prop::collection::vec(0.1..10.0f64, 1..5),
        start in prop::collection::vec(-5.0..5.0f64, 5),
    ) {
        // η below 1/max curvature keeps every coordinate contracting.
        let eta = 0.9 / curv.iter().cloned().fold(0.0, f64::max);
        let f = Diagonal(curv.clone());
        let x0 = ParamVector::new(start[..curv.len()].to_vec()).unwrap();
        let spec = OptimizerSpec::new(Optimizer::new(OptimizerKind::Sgd)).starting_at(x0);
        let t = minimize(&f, &spec, &RunConfig::new(60).with_learning_rate(eta), &StrategySet::none()).unwrap();
        let origin = ParamVector::zeros(curv.len());
        let d: Vec<f64> = t.entries().iter().map(|e| e.theta.distance(&origin)).collect();
        prop_assert!(d.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn every_optimizer_calls_the_gradient_once_per_step(steps in 0usize..40) {
        let b = Beale::default();
        for kind in OptimizerKind::ALL {
            let c = CountingObjective::new(&b);
            let t = minimize(&c, &OptimizerSpec::of(kind), &RunConfig::new(steps), &StrategySet::none()).unwrap();
            prop_assert_eq!(c.grad_calls(), steps);
            prop_assert_eq!(t.len(), steps + 1);
        }
    }
}
