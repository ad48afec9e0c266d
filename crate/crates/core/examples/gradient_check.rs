//! Central-difference checks of every bundled gradient, and the same check
//! catching a deliberately wrong one.
//!
//! cargo run --example gradient_check

use gradbench::problems::{gradcheck, sample_points, Beale, LogRegParams, Problem, PROBLEM_NAMES};
use gradbench::{GradientSample, Objective};

/// Beale with its gradient scaled by 1.01.
struct Skewed(Beale);

impl Objective for Skewed {
    fn name(&self) -> &str {
        "skewed-beale"
    }
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, theta: &[f64]) -> f64 {
        self.0.value(theta)
    }
    fn grad(&self, theta: &[f64]) -> GradientSample {
        self.0.grad(theta).map_values(|_, g| 1.01 * g)
    }
}

fn main() -> gradbench::Result<()> {
    let small = LogRegParams { n: 200, d: 30, density: 0.1 };
    for name in PROBLEM_NAMES {
        let problem = Problem::by_name(name, &small, 0)?;
        let f = problem.objective();
        let (lo, hi) = if problem.surface().is_some() { (-4.0, 4.0) } else { (-1.0, 1.0) };
        let r = gradcheck(f, &sample_points(f.dim(), lo, hi, 100, 1), 1e-5)?;
        println!("{name:<12} max rel error {:.2e} at coordinate {}", r.max_rel_error, r.worst_coordinate);
    }
    let r = gradcheck(&Skewed(Beale::default()), &sample_points(2, -4.0, 4.0, 100, 1), 1e-5)?;
    println!("{:<12} max rel error {:.2e} (detected: {})", "skewed", r.max_rel_error, !r.passed(1e-6));
    Ok(())
}
