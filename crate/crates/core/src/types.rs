//! Value types shared by every module: parameter points, gradients and
//! recorded trajectories.

use std::ops::Deref;

use crate::error::{check_dim, check_finite, Error, Result};

/// A point in parameter space. Every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(ParamVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        ParamVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &ParamVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ParamVector::new(values)
    }
}

/// Gradient of an objective at a point, stored densely or as sorted
/// `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum GradientSample {
    Dense(Vec<f64>),
    Sparse { dim: usize, entries: Vec<(usize, f64)> },
}

impl GradientSample {
    /// Builds a sparse gradient, checking that indices are strictly
    /// increasing and in range.
    pub fn sparse(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        for (k, &(idx, _)) in entries.iter().enumerate() {
            if idx >= dim {
                return Err(Error::config(format!(
                    "sparse index {idx} out of range for dimension {dim}"
                )));
            }
            if k > 0 && entries[k - 1].0 >= idx {
                return Err(Error::config(
                    "sparse indices must be strictly increasing",
                ));
            }
        }
        Ok(GradientSample::Sparse { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        GradientSample::Dense(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        match self {
            GradientSample::Dense(v) => v.len(),
            GradientSample::Sparse { dim, .. } => *dim,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, GradientSample::Sparse { .. })
    }

    /// Numeric error naming the first non-finite coordinate, if any.
    pub fn check_finite(&self) -> Result<()> {
        match self {
            GradientSample::Dense(v) => check_finite(v),
            GradientSample::Sparse { entries, .. } => {
                match entries.iter().find(|(_, v)| !v.is_finite()) {
                    Some(&(coordinate, value)) => Err(Error::Numeric { coordinate, value }),
                    None => Ok(()),
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            GradientSample::Dense(v) => v.clone(),
            GradientSample::Sparse { dim, entries } => {
                let mut out = vec![0.0; *dim];
                for &(i, v) in entries {
                    out[i] = v;
                }
                out
            }
        }
    }

    /// Iterates over stored `(index, value)` pairs. Dense gradients yield
    /// every coordinate.
    pub fn iter(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match self {
            GradientSample::Dense(v) => Box::new(v.iter().copied().enumerate()),
            GradientSample::Sparse { entries, .. } => Box::new(entries.iter().copied()),
        }
    }

    /// Applies `f` to every stored value, keeping the representation.
    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> GradientSample {
        match self {
            GradientSample::Dense(v) => {
                GradientSample::Dense(v.iter().enumerate().map(|(i, &x)| f(i, x)).collect())
            }
            GradientSample::Sparse { dim, entries } => GradientSample::Sparse {
                dim: *dim,
                entries: entries.iter().map(|&(i, x)| (i, f(i, x))).collect(),
            },
        }
    }
}

/// One recorded point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEntry {
    pub step: usize,
    pub theta: ParamVector,
    pub loss: f64,
}

/// Ordered record of `(step, theta, loss)`; entry 0 is the start point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    entries: Vec<TrajectoryEntry>,
}

impl Trajectory {
    pub fn new() -> Self {
        Trajectory::default()
    }

    /// Appends an entry. The first entry must have step 0 and later steps
    /// must be strictly increasing.
    pub fn push(&mut self, step: usize, theta: ParamVector, loss: f64) -> Result<()> {
        match self.entries.last() {
            None if step != 0 => {
                return Err(Error::config("trajectory must start at step 0"));
            }
            Some(last) if step <= last.step => {
                return Err(Error::config(format!(
                    "trajectory steps must increase: {} after {}",
                    step, last.step
                )));
            }
            Some(last) => check_dim(last.theta.dim(), theta.dim())?,
            None => {}
        }
        self.entries.push(TrajectoryEntry { step, theta, loss });
        Ok(())
    }

    pub fn entries(&self) -> &[TrajectoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first(&self) -> Option<&TrajectoryEntry> {
        self.entries.first()
    }

    pub fn last(&self) -> Option<&TrajectoryEntry> {
        self.entries.last()
    }

    pub fn dim(&self) -> Option<usize> {
        self.entries.first().map(|e| e.theta.dim())
    }

    /// Largest distance from the start point reached by any entry.
    pub fn max_excursion(&self) -> f64 {
        let Some(start) = self.entries.first() else {
            return 0.0;
        };
        self.entries
            .iter()
            .map(|e| e.theta.distance(&start.theta))
            .fold(0.0, f64::max)
    }

    /// First recorded step at which `pred` holds for theta.
    pub fn first_step_where(&self, mut pred: impl FnMut(&ParamVector) -> bool) -> Option<usize> {
        self.entries.iter().find(|e| pred(&e.theta)).map(|e| e.step)
    }
}
