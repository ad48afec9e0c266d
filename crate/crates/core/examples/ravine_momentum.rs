//! SGD and momentum on the ravine `½(x² + a y²)` with a = 100.
//!
//! SGD at η just under 2/a bounces across the narrow axis; momentum damps
//! the bounce and follows the long axis faster.
//!
//! cargo run --example ravine_momentum -- [eta]

use gradbench::problems::Ravine;
use gradbench::{minimize, OptimizerKind, OptimizerSpec, RunConfig, StrategySet, Trajectory};

fn flips(t: &Trajectory) -> usize {
    let dy: Vec<f64> = t.entries().windows(2).map(|w| w[1].theta[1] - w[0].theta[1]).collect();
    dy.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

fn main() -> gradbench::Result<()> {
    let eta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.015);
    let ravine = Ravine::default();
    let cfg = RunConfig::new(200).with_learning_rate(eta);
    for kind in [OptimizerKind::Sgd, OptimizerKind::Momentum] {
        let t = minimize(&ravine, &OptimizerSpec::of(kind), &cfg, &StrategySet::none())?;
        let hit = t.first_step_where(|p| p.norm() < 1e-3);
        println!(
            "{:<9} |θ| < 1e-3 at {:>5}  y sign flips in 200 steps: {:>3}  final |θ| {:.2e}",
            kind.name(),
            hit.map_or("never".to_string(), |k| k.to_string()),
            flips(&t),
            t.last().unwrap().theta.norm()
        );
    }
    Ok(())
}
