//! First-order optimizers, benchmark objectives and training strategies.
//!
//! The update rules in [`optim`] are pure functions from `(state, θ, g)` to
//! `(state', θ')`. [`train::minimize`] drives them over any [`Objective`],
//! with the batching, ordering, schedules, gradient noise and early
//! stopping from [`data`] and [`schedule`]. [`parallel`] runs lock-free
//! SGD on sparse problems and [`cli`] turns JSON configs into CSV
//! trajectories and SVG contour plots.
//!
//! Runnable examples live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `optimizer_zoo` | every update rule on the Beale surface |
//! | `beale_contours` | contour plot with all trajectories, as SVG |
//! | `saddle_escape` | steps each rule needs to leave the saddle |
//! | `ravine_momentum` | oscillation damping on an ill-conditioned quadratic |
//! | `hogwild_logreg` | parallel SGD against the sequential baseline |
//! | `training_strategies` | curriculum, annealing, noise and early stopping |
//! | `gradient_check` | central-difference checks, and catching a bad gradient |
//!
//! ```
//! use gradbench::{minimize, OptimizerKind, OptimizerSpec, RunConfig, StrategySet};
//! use gradbench::problems::Beale;
//!
//! let beale = Beale::default();
//! let spec = OptimizerSpec::of(OptimizerKind::Rmsprop);
//! let path = minimize(&beale, &spec, &RunConfig::new(5000), &StrategySet::none()).unwrap();
//! assert!(path.last().unwrap().loss < 1e-2);
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod objective;
pub mod optim;
pub mod parallel;
pub mod problems;
pub mod schedule;
pub mod train;
pub mod types;

pub use error::{Error, Result};
pub use objective::Objective;
pub use optim::{HyperParams, Optimizer, OptimizerKind, OptimizerState};
pub use train::{minimize, BatchPolicy, OptimizerSpec, RunConfig, StrategySet};
pub use types::{GradientSample, ParamVector, Trajectory};
