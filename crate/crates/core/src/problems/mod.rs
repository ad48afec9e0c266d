//! Benchmark objectives and the gradient-check oracle.

mod gradcheck;
mod logreg;
mod surfaces;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use gradcheck::{gradcheck, relative_error, sample_points, GradCheckReport};
pub use logreg::{
    sparse_logreg_grad_on, SparseLogReg, SparseRow, LABEL_NOISE, PLANTED_NONZEROS,
};
pub use surfaces::{AnalyticSurface, Beale, DomainBox, Ravine, Saddle};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::types::ParamVector;

pub const PROBLEM_NAMES: [&str; 4] = ["beale", "saddle", "ravine", "logreg"];

/// Size of a generated logistic-regression problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    pub n: usize,
    pub d: usize,
    pub density: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            n: 10_000,
            d: 1000,
            density: 0.01,
        }
    }
}

/// A named problem instance.
#[derive(Debug, Clone)]
pub enum Problem {
    Beale(Beale),
    Saddle(Saddle),
    Ravine(Ravine),
    LogReg(SparseLogReg),
}

impl Problem {
    /// Builds a problem by name. `seed` only affects `logreg`.
    pub fn by_name(name: &str, logreg: &LogRegParams, seed: u64) -> Result<Self> {
        Ok(match name {
            "beale" => Problem::Beale(Beale::default()),
            "saddle" => Problem::Saddle(Saddle::default()),
            "ravine" => Problem::Ravine(Ravine::default()),
            "logreg" => {
                Problem::LogReg(SparseLogReg::generate(logreg.n, logreg.d, logreg.density, seed)?)
            }
            other => {
                return Err(Error::config(format!(
                    "unknown problem `{other}`; valid names: {}",
                    PROBLEM_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &str {
        self.objective().name()
    }

    pub fn objective(&self) -> &dyn Objective {
        match self {
            Problem::Beale(p) => p,
            Problem::Saddle(p) => p,
            Problem::Ravine(p) => p,
            Problem::LogReg(p) => p,
        }
    }

    pub fn surface(&self) -> Option<&dyn AnalyticSurface> {
        match self {
            Problem::Beale(p) => Some(p),
            Problem::Saddle(p) => Some(p),
            Problem::Ravine(p) => Some(p),
            Problem::LogReg(_) => None,
        }
    }

    /// Surface start point, or the zero vector for dataset problems.
    pub fn canonical_start(&self) -> ParamVector {
        match self.surface() {
            Some(s) => s.canonical_start(),
            None => ParamVector::zeros(self.objective().dim()),
        }
    }

    /// Replaces the start point of a surface problem.
    pub fn set_start(&mut self, start: &[f64]) -> Result<()> {
        let pair = match start {
            [x, y] if x.is_finite() && y.is_finite() => (*x, *y),
            _ => {
                return Err(Error::config(
                    "start must be a finite point of the problem's dimension",
                ))
            }
        };
        match self {
            Problem::Beale(p) => p.start = pair,
            Problem::Saddle(p) => p.start = pair,
            Problem::Ravine(p) => p.start = pair,
            Problem::LogReg(_) => {
                return Err(Error::Unsupported(
                    "logreg always starts from the zero vector".into(),
                ))
            }
        }
        Ok(())
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
