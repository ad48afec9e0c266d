use crate::error::{Error, Result};
use crate::types::{GradientSample, ParamVector};

/// A differentiable objective `J(θ)`.
///
/// Analytic surfaces report `n_examples() == 0` and only support the
/// full-objective methods. Dataset objectives additionally expose
/// per-example and per-batch evaluation; for those, the full objective is
/// the mean over all examples.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn value(&self, theta: &[f64]) -> f64;

    fn grad(&self, theta: &[f64]) -> GradientSample;

    /// Start point used when a run does not supply one.
    fn initial_point(&self) -> ParamVector {
        ParamVector::zeros(self.dim())
    }

    fn n_examples(&self) -> usize {
        0
    }

    fn value_on(&self, _theta: &[f64], _examples: &[usize]) -> Result<f64> {
        Err(Error::config(format!(
            "objective `{}` has no training examples",
            self.name()
        )))
    }

    fn grad_on(&self, _theta: &[f64], _examples: &[usize]) -> Result<GradientSample> {
        Err(Error::config(format!(
            "objective `{}` has no training examples",
            self.name()
        )))
    }

    /// Loss monitored by early stopping. Defaults to the objective itself.
    fn validation_value(&self, theta: &[f64]) -> f64 {
        self.value(theta)
    }

    /// Per-example difficulty used by curriculum ordering, if defined.
    fn difficulty(&self, _example: usize) -> Option<f64> {
        None
    }
}

/// Wraps another objective and counts gradient evaluations.
pub struct CountingObjective<'a, O: ?Sized> {
    inner: &'a O,
    grads: std::sync::atomic::AtomicUsize,
}

impl<'a, O: Objective + ?Sized> CountingObjective<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        CountingObjective {
            inner,
            grads: std::sync::atomic::AtomicUsize::new(0),
        }
    }

    pub fn grad_calls(&self) -> usize {
        self.grads.load(std::sync::atomic::Ordering::SeqCst)
    }

    fn bump(&self) {
        self.grads.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
    }
}

impl<O: Objective + ?Sized> Objective for CountingObjective<'_, O> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.inner.value(theta)
    }

    fn grad(&self, theta: &[f64]) -> GradientSample {
        self.bump();
        self.inner.grad(theta)
    }

    fn initial_point(&self) -> ParamVector {
        self.inner.initial_point()
    }

    fn n_examples(&self) -> usize {
        self.inner.n_examples()
    }

    fn value_on(&self, theta: &[f64], examples: &[usize]) -> Result<f64> {
        self.inner.value_on(theta, examples)
    }

    fn grad_on(&self, theta: &[f64], examples: &[usize]) -> Result<GradientSample> {
        self.bump();
        self.inner.grad_on(theta, examples)
    }

    fn validation_value(&self, theta: &[f64]) -> f64 {
        self.inner.validation_value(theta)
    }

    fn difficulty(&self, example: usize) -> Option<f64> {
        self.inner.difficulty(example)
    }
}
