//! Every update rule on the Beale surface from the canonical start, with
//! default hyperparameters.
//!
//! cargo run --example optimizer_zoo -- [steps]

use gradbench::problems::{AnalyticSurface, Beale};
use gradbench::{minimize, OptimizerKind, OptimizerSpec, RunConfig, StrategySet};

fn main() -> gradbench::Result<()> {
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let beale = Beale::default();
    let (minimum, _) = beale.known_minimum().expect("beale has a minimum");

    println!("{:<9} {:>8} {:>12} {:>10} {:>10}", "rule", "eta", "final loss", "dist(min)", "excursion");
    for kind in OptimizerKind::ALL {
        let spec = OptimizerSpec::of(kind);
        let path = match minimize(&beale, &spec, &RunConfig::new(steps), &StrategySet::none()) {
            Ok(p) => p,
            Err(e) => {
                println!("{:<9} failed: {e}", kind.name());
                continue;
            }
        };
        let last = path.last().unwrap();
        println!(
            "{:<9} {:>8} {:>12.4e} {:>10.4} {:>10.4}",
            kind.name(),
            spec.optimizer.hyper.eta,
            last.loss,
            last.theta.distance(&minimum),
            path.max_excursion()
        );
    }
    Ok(())
}
