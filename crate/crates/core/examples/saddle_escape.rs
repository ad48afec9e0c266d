//! How long each rule takes to leave the saddle of `x² - y²` from a point
//! just off it, at one shared learning rate.
//!
//! cargo run --example saddle_escape -- [eta]

use gradbench::optim::HyperParams;
use gradbench::problems::Saddle;
use gradbench::{minimize, Optimizer, OptimizerKind, OptimizerSpec, RunConfig, StrategySet};

fn main() -> gradbench::Result<()> {
    let eta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let saddle = Saddle::default();
    println!("start {:?}, eta {eta}", Saddle::CANONICAL_START);
    for kind in OptimizerKind::ALL {
        let hyper = HyperParams {
            eta,
            ..HyperParams::defaults(kind)
        };
        let spec = OptimizerSpec::new(Optimizer::with_hyper(kind, hyper)?);
        let path = minimize(&saddle, &spec, &RunConfig::new(400), &StrategySet::none());
        let escape = path
            .ok()
            .and_then(|p| p.first_step_where(|theta| theta[1].abs() > 1.0));
        match escape {
            Some(k) => println!("{:<9} |y| > 1 after {k:>3} steps", kind.name()),
            None => println!("{:<9} still near the saddle", kind.name()),
        }
    }
    Ok(())
}
