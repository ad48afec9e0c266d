//! Lock-free parallel SGD over a shared parameter vector.
//!
//! Workers read the shared vector without snapshotting and apply per-example
//! sparse updates as coordinate-wise atomic adds. The only barrier is the
//! join at the end of each epoch.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_finite, Error, Result};
use crate::objective::Objective;
use crate::problems::SparseLogReg;
use crate::types::ParamVector;

/// Density at or above which a problem is treated as dense.
pub const DENSE_THRESHOLD: f64 = 0.5;

/// A vector of `f64` cells with atomic load and atomic add.
///
/// Values are stored as their bit patterns, so a load always returns a value
/// that some add produced.
#[derive(Debug)]
pub struct SharedParams {
    cells: Vec<AtomicU64>,
}

impl SharedParams {
    pub fn new(initial: &[f64]) -> Self {
        SharedParams {
            cells: initial.iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(&vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn load(&self, i: usize) -> f64 {
        f64::from_bits(self.cells[i].load(Ordering::Relaxed))
    }

    /// Atomically adds `delta` to cell `i` and returns the previous value.
    pub fn fetch_add(&self, i: usize, delta: f64) -> f64 {
        let cell = &self.cells[i];
        let mut current = cell.load(Ordering::Relaxed);
        loop {
            let next = (f64::from_bits(current) + delta).to_bits();
            match cell.compare_exchange_weak(current, next, Ordering::Relaxed, Ordering::Relaxed) {
                Ok(prev) => return f64::from_bits(prev),
                Err(actual) => current = actual,
            }
        }
    }

    pub fn snapshot(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.load(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HogwildConfig {
    pub workers: usize,
    pub eta: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl HogwildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::config("hogwild needs at least one worker"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!(
                "hogwild learning rate must be positive, got {}",
                self.eta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HogwildResult {
    pub theta: ParamVector,
    /// Full-dataset loss of `theta`.
    pub final_loss: f64,
    /// Full-dataset loss after each epoch.
    pub epoch_losses: Vec<f64>,
    /// Set when a dense problem was run with more than one worker.
    pub dense_warning: bool,
}

/// The generator worker `worker` uses in epoch `epoch`.
pub fn worker_rng(seed: u64, epoch: usize, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64) << 32) | worker as u64);
    rng
}

/// Number of examples worker `worker` draws per epoch: `n / W`, with the
/// remainder spread over the first workers.
pub fn worker_share(n: usize, workers: usize, worker: usize) -> usize {
    n / workers + usize::from(worker < n % workers)
}

/// The sparse SGD increment `-η ∇ℓ_i(θ)` for example `example`, reading
/// coordinates through `read`. Only the example's own features appear.
pub fn example_update(
    problem: &SparseLogReg,
    example: usize,
    eta: f64,
    read: impl Fn(usize) -> f64,
) -> Vec<(usize, f64)> {
    let row = &problem.rows[example];
    let margin: f64 = row.indices.iter().zip(&row.values).map(|(&i, v)| read(i) * v).sum();
    let c = -row.label / (1.0 + (row.label * margin).exp());
    row.indices
        .iter()
        .zip(&row.values)
        .map(|(&i, v)| (i, -eta * c * v))
        .collect()
}

fn run_worker(problem: &SparseLogReg, shared: &SharedParams, eta: f64, samples: usize, mut rng: ChaCha8Rng) {
    let n = problem.rows.len();
    for _ in 0..samples {
        let example = rng.random_range(0..n);
        for (i, delta) in example_update(problem, example, eta, |i| shared.load(i)) {
            shared.fetch_add(i, delta);
        }
    }
}

fn finish(problem: &SparseLogReg, theta: Vec<f64>, epoch_losses: Vec<f64>, dense_warning: bool) -> Result<HogwildResult> {
    check_finite(&theta)?;
    let final_loss = problem.value(&theta);
    Ok(HogwildResult {
        theta: ParamVector::new(theta)?,
        final_loss,
        epoch_losses,
        dense_warning,
    })
}

/// Runs plain SGD with `config.workers` threads updating one shared vector,
/// starting from zero.
pub fn hogwild_train(problem: &SparseLogReg, config: &HogwildConfig) -> Result<HogwildResult> {
    config.validate()?;
    let dense = problem.observed_density() >= DENSE_THRESHOLD && config.workers > 1;
    if dense {
        log::warn!(
            "hogwild on a dense problem (density {:.2}) with {} workers: updates will collide",
            problem.observed_density(),
            config.workers
        );
    }
    let n = problem.rows.len();
    let shared = SharedParams::zeros(problem.dim);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        std::thread::scope(|scope| {
            for w in 0..config.workers {
                let rng = worker_rng(config.seed, epoch, w);
                let samples = worker_share(n, config.workers, w);
                let shared = &shared;
                scope.spawn(move || run_worker(problem, shared, config.eta, samples, rng));
            }
        });
        let theta = shared.snapshot();
        check_finite(&theta)?;
        epoch_losses.push(problem.value(&theta));
    }
    finish(problem, shared.snapshot(), epoch_losses, dense)
}

/// Single-threaded SGD drawing examples exactly as worker 0 of a one-worker
/// Hogwild run does, on a plain vector.
pub fn sequential_baseline(problem: &SparseLogReg, eta: f64, epochs: usize, seed: u64) -> Result<HogwildResult> {
    HogwildConfig {
        workers: 1,
        eta,
        epochs,
        seed,
    }
    .validate()?;
    let n = problem.rows.len();
    let mut theta = vec![0.0; problem.dim];
    let mut epoch_losses = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let mut rng = worker_rng(seed, epoch, 0);
        for _ in 0..n {
            let example = rng.random_range(0..n);
            for (i, delta) in example_update(problem, example, eta, |i| theta[i]) {
                theta[i] += delta;
            }
        }
        check_finite(&theta)?;
        epoch_losses.push(problem.value(&theta));
    }
    finish(problem, theta, epoch_losses, false)
}
