//! Writes the Beale contour plot with the bundled figure's trajectories.
//!
//! cargo run --release --example beale_contours -- [out.svg]

use gradbench::cli::{describe, render_problem_svg, run_experiment, ContourSpec, ExperimentConfig};
use gradbench::cli::experiment::build_problem;

fn main() -> gradbench::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "beale.svg".into());
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/beale_figure.json");
    let config = ExperimentConfig::load(path.as_ref())?;
    let problem = build_problem(&config)?;
    let runs = run_experiment(&config)?;

    let mut spec = ContourSpec::for_surface(problem.surface().expect("beale is a surface"));
    spec.resolution = config.contour.resolution;
    spec.levels = config.contour.levels;
    let svg = render_problem_svg(&problem, &spec, &runs, &describe(&config))?;
    std::fs::write(&out, svg).map_err(|e| gradbench::Error::io(&out, e))?;

    for (name, t) in &runs {
        let last = t.last().unwrap();
        println!("{name:<9} loss {:.3e} after {} steps, excursion {:.3}", last.loss, last.step, t.max_excursion());
    }
    println!("wrote {out}");
    Ok(())
}
