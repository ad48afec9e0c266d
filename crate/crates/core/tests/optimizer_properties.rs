use gradbench::error::Error;
use gradbench::optim::*;
use gradbench::types::{GradientSample, ParamVector};
use proptest::prelude::*;

fn pv(v: Vec<f64>) -> ParamVector {
    ParamVector::new(v).unwrap()
}

fn kind() -> impl Strategy<Value = OptimizerKind> {
    prop::sample::select(OptimizerKind::ALL.to_vec())
}

/// Values spanning ordinary and extreme magnitudes, including zero.
fn wide() -> impl Strategy<Value = f64> {
    prop_oneof![
        -10.0..10.0f64,
        Just(0.0),
        Just(1e100),
        Just(-1e100),
        Just(1e-100),
        Just(-1e-100),
    ]
}

proptest! {
    #[test]
    fn steps_never_produce_non_finite_parameters(
        k in kind(),
        theta in prop::collection::vec(-10.0..10.0f64, 3),
        grads in prop::collection::vec(prop::collection::vec(wide(), 3), 1..6),
    ) {
        let opt = Optimizer::new(k);
        let mut state = opt.init_state(3);
        let mut x = pv(theta);
        for g in grads {
            let mut grad_fn = |_: &ParamVector| Ok(GradientSample::Dense(g.clone()));
            match opt.step(&state, &x, opt.hyper.eta, &mut grad_fn) {
                Ok((s, nx)) => {
                    prop_assert!(nx.iter().all(|v| v.is_finite()));
                    state = s;
                    x = nx;
                }
                Err(e) => {
                    prop_assert!(matches!(e, Error::Numeric { .. }), "{e}");
                    break;
                }
            }
        }
    }

    #[test]
    fn steps_are_pure(
        k in kind(),
        theta in prop::collection::vec(-5.0..5.0f64, 2),
        g1 in prop::collection::vec(-5.0..5.0f64, 2),
        g2 in prop::collection::vec(-5.0..5.0f64, 2),
    ) {
        let opt = Optimizer::new(k);
        let s0 = opt.init_state(2);
        let x0 = pv(theta);
        let mut first = |_: &ParamVector| Ok(GradientSample::Dense(g1.clone()));
        let (s1, x1) = opt.step(&s0, &x0, opt.hyper.eta, &mut first).unwrap();
        let snapshot = (s1.clone(), x1.clone());
        let mut second = |_: &ParamVector| Ok(GradientSample::Dense(g2.clone()));
        let a = opt.step(&s1, &x1, opt.hyper.eta, &mut second).unwrap();
        let b = opt.step(&s1, &x1, opt.hyper.eta, &mut second).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!((s1, x1), snapshot);
    }

    #[test]
    fn adamax_u_is_decayed_running_max(gs in prop::collection::vec(-100.0..100.0f64, 1..50)) {
        let b2 = 0.999;
        let mut s = AdamaxState { m: vec![0.0], u: vec![0.0], t: 0 };
        let mut x = pv(vec![0.0]);
        for t in 0..gs.len() {
            let (ns, nx) = adamax_step(&s, &x, &GradientSample::Dense(vec![gs[t]]), 0.002, 0.9, b2).unwrap();
            let brute = (0..=t)
                .map(|k| b2.powi((t - k) as i32) * gs[k].abs())
                .fold(0.0, f64::max);
            prop_assert!((ns.u[0] - brute).abs() <= 1e-12 * brute.max(1.0));
            prop_assert!(ns.u[0] >= gs[t].abs());
            s = ns;
            x = nx;
        }
    }

    #[test]
    fn adagrad_rate_never_increases(gs in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 1..100)) {
        let mut s = AdagradState { g2_sum: vec![0.0; 2] };
        let mut x = pv(vec![0.0; 2]);
        let mut prev = [f64::INFINITY; 2];
        for g in gs {
            let (ns, nx) = adagrad_step(&s, &x, &GradientSample::Dense(g), 0.01, 1e-8).unwrap();
            for (p, g2) in prev.iter_mut().zip(&ns.g2_sum) {
                let rate = 0.01 / (g2 + 1e-8).sqrt();
                prop_assert!(rate <= *p);
                *p = rate;
            }
            s = ns;
            x = nx;
        }
    }

    #[test]
    fn adadelta_opposes_gradient(g in prop::collection::vec(-5.0..5.0f64, 3)) {
        let s = AdadeltaState { eg2: vec![0.0; 3], edx2: vec![0.0; 3] };
        let x = pv(vec![0.0; 3]);
        let (_, nx) = adadelta_step(&s, &x, &GradientSample::Dense(g.clone()), 0.9, 1e-6).unwrap();
        for (dx, gi) in nx.iter().zip(&g) {
            prop_assert!(dx * gi <= 0.0);
        }
    }

    #[test]
    fn sparse_and_dense_gradients_agree_for_local_rules(
        theta in prop::collection::vec(-5.0..5.0f64, 6),
        entries in prop::collection::btree_map(0usize..6, -5.0..5.0f64, 0..6),
    ) {
        let entries: Vec<(usize, f64)> = entries.into_iter().collect();
        let sparse = GradientSample::sparse(6, entries).unwrap();
        let dense = GradientSample::Dense(sparse.to_dense());
        let x = pv(theta);
        prop_assert_eq!(sgd_step(&x, &sparse, 0.1).unwrap(), sgd_step(&x, &dense, 0.1).unwrap());
        let s = AdagradState { g2_sum: vec![0.5; 6] };
        prop_assert_eq!(
            adagrad_step(&s, &x, &sparse, 0.1, 1e-8).unwrap(),
            adagrad_step(&s, &x, &dense, 0.1, 1e-8).unwrap()
        );
    }
}

#[test]
fn momentum_velocity_approaches_terminal_value() {
    let mut s = MomentumState::new(1, MomentumVariant::Classic);
    let mut x = pv(vec![0.0]);
    for _ in 0..400 {
        let (ns, nx) = momentum_step(&s, &x, &GradientSample::Dense(vec![1.0]), 0.1, 0.9).unwrap();
        s = ns;
        x = nx;
    }
    assert!((s.v[0] - 1.0).abs() < 1e-12);
}

#[test]
fn rmsprop_magnitude_tends_to_eta() {
    let mut s = RmspropState { eg2: vec![0.0] };
    let mut x = pv(vec![0.0]);
    let mut last = 0.0;
    for _ in 0..500 {
        let (ns, nx) = rmsprop_step(&s, &x, &GradientSample::Dense(vec![2.0]), 0.001, 0.9, 1e-8).unwrap();
        last = (nx[0] - x[0]).abs();
        s = ns;
        x = nx;
    }
    assert!((last - 0.001).abs() < 1e-9);
}

#[test]
fn adagrad_constant_gradient_step_is_eta_over_sqrt_t() {
    let mut s = AdagradState { g2_sum: vec![0.0] };
    let mut x = pv(vec![0.0]);
    for t in 1..=100 {
        let (ns, nx) = adagrad_step(&s, &x, &GradientSample::Dense(vec![2.0]), 0.01, 1e-8).unwrap();
        let step = (nx[0] - x[0]).abs();
        assert!((step - 0.01 / (t as f64).sqrt()).abs() < 1e-10);
        s = ns;
        x = nx;
    }
}

#[test]
fn dimension_mismatch_is_a_config_class_error() {
    let err = sgd_step(&pv(vec![0.0; 2]), &GradientSample::Dense(vec![1.0; 3]), 0.1).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
