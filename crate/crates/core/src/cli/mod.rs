//! Experiment runner behind the `gradbench` binary: JSON configs, CSV
//! export and SVG contour plots.
//!
//! Exit codes: `0` success, `2` usage or configuration error, `3` numeric
//! failure, `4` I/O error.

pub mod config;
pub mod experiment;
pub mod export;
pub mod plot;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use experiment::{describe, run_experiment};
pub use export::{csv_string, export_csv, parse_csv, write_csv, CsvRow, NamedTrajectory};
pub use plot::{render_contour_svg, render_problem_svg, ContourSpec};

use crate::error::{Error, Result};
use crate::optim::{HyperParams, OptimizerKind};
use crate::problems::{gradcheck, sample_points, LogRegParams, Problem, PROBLEM_NAMES};

#[derive(Debug, Parser)]
#[command(name = "gradbench", version, about = "Gradient-descent optimizer benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Problem name (overrides the config).
    #[arg(long)]
    pub problem: Option<String>,
    /// Optimizer name; repeat for several (replaces the config's list).
    #[arg(long = "optimizer")]
    pub optimizers: Vec<String>,
    /// Learning rate applied to every optimizer.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Seed; takes precedence over GRADBENCH_SEED and the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parallel scheme; only `hogwild` is available.
    #[arg(long)]
    pub parallel: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write its trajectories as CSV (stdout unless a
    /// path is configured), plus an SVG plot if one is configured.
    Run {
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a 2-D experiment and render the contour plot (stdout unless a
    /// path is configured).
    Plot {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Also write a numbered SVG per frame into this directory.
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long, default_value_t = 60)]
        frame_count: usize,
    },
    /// Compare a problem's analytic gradient with central differences.
    Gradcheck {
        problem: String,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List problems and optimizers.
    List,
}

/// Applies command-line overrides, then the seed precedence
/// flag > `GRADBENCH_SEED` > config.
pub fn apply_overrides(config: &mut ExperimentConfig, o: &Overrides) -> Result<()> {
    if let Some(p) = &o.problem {
        config.problem = p.clone();
    }
    if !o.optimizers.is_empty() {
        config.optimizers = o.optimizers.iter().map(|n| config::OptimizerEntry::named(n)).collect();
    }
    if let Some(eta) = o.eta {
        config.optimizers.iter_mut().for_each(|e| e.eta = Some(eta));
    }
    if let Some(steps) = o.steps {
        config.steps = steps;
    }
    match o.parallel.as_deref() {
        None => {}
        Some("hogwild") => {
            config.parallel.get_or_insert(config::ParallelBlock {
                mode: config::ParallelMode::Hogwild,
                workers: 4,
                epochs: 5,
            });
        }
        Some(other) => {
            return Err(Error::config(format!(
                "unknown parallel scheme `{other}`; valid: hogwild"
            )))
        }
    }
    if o.workers.is_some() || o.epochs.is_some() {
        let block = config
            .parallel
            .as_mut()
            .ok_or_else(|| Error::config("--workers and --epochs need --parallel hogwild"))?;
        if let Some(w) = o.workers {
            block.workers = w;
        }
        if let Some(e) = o.epochs {
            block.epochs = e;
        }
    }
    if let Some(p) = &o.csv {
        config.output.csv = Some(p.clone());
    }
    if let Some(p) = &o.svg {
        config.output.svg = Some(p.clone());
    }
    config.apply_env_seed()?;
    if let Some(seed) = o.seed {
        config.seed = seed;
    }
    config.validate()
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn write_all(mut file: File, path: &Path, text: &str) -> Result<()> {
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

fn contour_spec(config: &ExperimentConfig, problem: &Problem) -> Result<ContourSpec> {
    let surface = problem.surface().ok_or_else(|| {
        Error::Unsupported(format!("`{}` is not a 2-D surface and cannot be plotted", problem.name()))
    })?;
    let mut spec = ContourSpec::for_surface(surface);
    spec.resolution = config.contour.resolution;
    spec.levels = config.contour.levels;
    if let Some(log) = config.contour.log_levels {
        spec.log_levels = log;
    }
    Ok(spec)
}

/// What [`execute`] should produce besides the configured files.
#[derive(Debug, Clone, Default)]
pub struct ExecuteOptions {
    /// Render the SVG even when no SVG path is configured (to stdout).
    pub plot: bool,
    /// Directory and count for a per-frame SVG sequence.
    pub frames: Option<(PathBuf, usize)>,
}

/// Runs `config` and writes its outputs. Output files are created before
/// any computation so that unwritable paths fail fast. Whatever has no
/// configured path (the CSV for `run`, the SVG for `plot`) is written to
/// `stdout`.
pub fn execute(
    config: &ExperimentConfig,
    options: &ExecuteOptions,
    stdout: &mut dyn Write,
) -> Result<Vec<NamedTrajectory>> {
    config.validate()?;
    let problem = experiment::build_problem(config)?;
    let wants_svg = options.plot || config.output.svg.is_some() || options.frames.is_some();
    let spec = if wants_svg {
        Some(contour_spec(config, &problem)?)
    } else {
        None
    };

    let csv_file = config.output.csv.as_deref().map(|p| create(p).map(|f| (f, p))).transpose()?;
    let svg_file = config.output.svg.as_deref().map(|p| create(p).map(|f| (f, p))).transpose()?;
    if let Some((dir, _)) = &options.frames {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let trajectories = experiment::run_on(config, &problem)?;
    let desc = describe(config);
    let stdout_err = |e| Error::io("<stdout>", e);

    let csv = csv_string(&trajectories)?;
    match csv_file {
        Some((f, p)) => write_all(f, p, &csv)?,
        None if !options.plot => stdout.write_all(csv.as_bytes()).map_err(stdout_err)?,
        None => {}
    }
    if let Some(spec) = &spec {
        let svg = render_problem_svg(&problem, spec, &trajectories, &desc)?;
        match svg_file {
            Some((f, p)) => write_all(f, p, &svg)?,
            None if options.plot => stdout.write_all(svg.as_bytes()).map_err(stdout_err)?,
            None => {}
        }
        if let Some((dir, count)) = &options.frames {
            for (k, frame) in plot::frame_prefixes(&trajectories, *count).iter().enumerate() {
                let path = dir.join(format!("frame_{k:04}.svg"));
                let svg = render_problem_svg(&problem, spec, frame, &desc)?;
                std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    Ok(trajectories)
}

fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let problem = overrides
                .problem
                .as_deref()
                .ok_or_else(|| Error::config("give a config file or --problem and --optimizer"))?;
            if overrides.optimizers.is_empty() {
                return Err(Error::config("give a config file or --problem and --optimizer"));
            }
            ExperimentConfig::new(problem, &[], 1000)
        }
    };
    apply_overrides(&mut config, overrides)?;
    Ok(config)
}

fn summarize(config: &ExperimentConfig, trajectories: &[NamedTrajectory]) {
    eprintln!("{}", describe(config));
    for (name, t) in trajectories {
        if let Some(last) = t.last() {
            eprintln!("  {name:<10} step {:>6}  loss {:.6e}", last.step, last.loss);
        }
    }
}

fn run_gradcheck(name: &str, points: usize, h: f64, seed: u64, out: &mut dyn Write) -> Result<i32> {
    // Dataset problems are checked on a small instance so that the
    // 2·d probes per point stay cheap.
    let small = LogRegParams {
        n: 200,
        d: 40,
        density: 0.1,
    };
    let problem = Problem::by_name(name, &small, seed)?;
    let objective = problem.objective();
    let (lo, hi) = if problem.surface().is_some() { (-4.0, 4.0) } else { (-1.0, 1.0) };
    let pts = sample_points(objective.dim(), lo, hi, points, seed);
    let report = gradcheck(objective, &pts, h)?;
    let tolerance = 1e-6;
    let verdict = if report.passed(tolerance) { "ok" } else { "FAILED" };
    writeln!(
        out,
        "{name}: max rel error {:.3e} (coordinate {}, point {}), {} points checked, {} skipped: {verdict}",
        report.max_rel_error,
        report.worst_coordinate,
        report.worst_point,
        report.points_checked,
        report.points_skipped
    )
    .map_err(|e| Error::io("<stdout>", e))?;
    Ok(if report.passed(tolerance) { 0 } else { 3 })
}

fn list(out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "problems:")?;
    for p in PROBLEM_NAMES {
        writeln!(out, "  {p}")?;
    }
    writeln!(out, "optimizers:")?;
    for kind in OptimizerKind::ALL {
        let h = HyperParams::defaults(kind);
        writeln!(
            out,
            "  {:<9} eta={} gamma={} beta1={} beta2={} epsilon={:e}",
            kind.name(),
            h.eta,
            h.gamma,
            h.beta1,
            h.beta2,
            h.epsilon
        )?;
    }
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Run { config, overrides } => {
            let config = load_config(config.as_deref(), &overrides)?;
            let t = execute(&config, &ExecuteOptions::default(), stdout)?;
            summarize(&config, &t);
            Ok(0)
        }
        Command::Plot {
            config,
            overrides,
            frames,
            frame_count,
        } => {
            let config = load_config(Some(&config), &overrides)?;
            let options = ExecuteOptions {
                plot: true,
                frames: frames.map(|d| (d, frame_count)),
            };
            let t = execute(&config, &options, stdout)?;
            summarize(&config, &t);
            Ok(0)
        }
        Command::Gradcheck {
            problem,
            points,
            h,
            seed,
        } => run_gradcheck(&problem, points, h, seed, stdout),
        Command::List => {
            list(stdout).map_err(|e| Error::io("<stdout>", e))?;
            Ok(0)
        }
    }
}
