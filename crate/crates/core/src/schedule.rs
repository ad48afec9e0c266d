//! Learning-rate schedules, annealed gradient noise and early stopping.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::GradientSample;

/// Shape of a learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Constant,
    /// `base · drop^⌊t / every_k⌋`
    StepDecay { drop: f64, every_k: usize },
    /// `base / (1 + k t)`
    InverseT { k: f64 },
    /// Multiply the current rate by `factor` whenever the improvement
    /// between epochs falls below `min_improvement`.
    ThresholdAnneal { factor: f64, min_improvement: f64 },
}

impl ScheduleKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScheduleKind::Constant => Ok(()),
            ScheduleKind::StepDecay { drop, every_k } => {
                if !(drop > 0.0 && drop < 1.0) {
                    return Err(Error::config("schedule.drop must lie in (0, 1)"));
                }
                if every_k == 0 {
                    return Err(Error::config("schedule.every_k must be positive"));
                }
                Ok(())
            }
            ScheduleKind::InverseT { k } => {
                if k > 0.0 && k.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("schedule.k must be positive"))
                }
            }
            ScheduleKind::ThresholdAnneal {
                factor,
                min_improvement,
            } => {
                if !(factor > 0.0 && factor < 1.0) {
                    return Err(Error::config("schedule.factor must lie in (0, 1)"));
                }
                if min_improvement.is_nan() || min_improvement <= 0.0 {
                    return Err(Error::config("schedule.min_improvement must be positive"));
                }
                Ok(())
            }
        }
    }
}

/// A schedule anchored at a base rate. Threshold annealing keeps the
/// current rate between calls; the other kinds depend only on `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    pub kind: ScheduleKind,
    pub base_eta: f64,
    current: f64,
}

impl LrSchedule {
    pub fn new(kind: ScheduleKind, base_eta: f64) -> Result<Self> {
        kind.validate()?;
        if !(base_eta > 0.0 && base_eta.is_finite()) {
            return Err(Error::config(format!(
                "base learning rate must be positive, got {base_eta}"
            )));
        }
        Ok(LrSchedule {
            kind,
            base_eta,
            current: base_eta,
        })
    }

    pub fn constant(base_eta: f64) -> Result<Self> {
        Self::new(ScheduleKind::Constant, base_eta)
    }

    /// Rate for step `t`. `epoch_improvement` is the decrease in loss over
    /// the epoch that just ended, passed only at epoch boundaries.
    pub fn lr_at(&mut self, t: usize, epoch_improvement: Option<f64>) -> f64 {
        let rate = match self.kind {
            ScheduleKind::Constant => self.base_eta,
            ScheduleKind::StepDecay { drop, every_k } => {
                let drops = (t / every_k).min(i32::MAX as usize) as i32;
                self.base_eta * drop.powi(drops)
            }
            ScheduleKind::InverseT { k } => self.base_eta / (1.0 + k * t as f64),
            ScheduleKind::ThresholdAnneal {
                factor,
                min_improvement,
            } => {
                if let Some(imp) = epoch_improvement {
                    if imp < min_improvement {
                        self.current *= factor;
                    }
                }
                self.current
            }
        };
        rate.max(f64::MIN_POSITIVE)
    }
}

/// Gaussian gradient noise with variance `eta / (1 + t)^gamma`.
///
/// `eta` and `gamma` here are the noise schedule's own constants and are
/// unrelated to the optimizer's learning rate or momentum term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub eta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSchedule {
    pub fn new(eta: f64, gamma: f64, seed: u64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) || !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::config("noise.eta and noise.gamma must be nonnegative"));
        }
        Ok(NoiseSchedule { eta, gamma, seed })
    }

    pub fn variance(&self, t: usize) -> f64 {
        noise_variance(self, t)
    }
}

pub fn noise_variance(sched: &NoiseSchedule, t: usize) -> f64 {
    sched.eta / (1.0 + t as f64).powf(sched.gamma)
}

/// Generator for the draws at step `t`; independent streams per step.
fn noise_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// Adds an independent `N(0, σ²_t)` draw to every stored coordinate of `g`.
/// Sparse gradients stay sparse. Output is a function of `(g, sched, t)`.
pub fn apply_noise(g: &GradientSample, sched: &NoiseSchedule, t: usize) -> GradientSample {
    let var = noise_variance(sched, t);
    if var == 0.0 {
        return g.clone();
    }
    let normal = Normal::new(0.0, var.sqrt()).expect("finite standard deviation");
    let mut rng = noise_rng(sched.seed, t);
    g.map_values(|_, v| v + normal.sample(&mut rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

/// Patience counter over a monitored validation loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStopState {
    pub best_loss: f64,
    pub best_step: usize,
    pub patience: usize,
    pub stale_count: usize,
    /// Required decrease for an observation to count as improvement.
    pub min_delta: f64,
}

impl EarlyStopState {
    pub fn new(patience: usize) -> Result<Self> {
        if patience == 0 {
            return Err(Error::config("early_stop.patience must be positive"));
        }
        Ok(EarlyStopState {
            best_loss: f64::INFINITY,
            best_step: 0,
            patience,
            stale_count: 0,
            min_delta: 0.0,
        })
    }

    pub fn with_min_delta(mut self, min_delta: f64) -> Self {
        self.min_delta = min_delta.max(0.0);
        self
    }

    pub fn observe(&self, t: usize, val_loss: f64) -> (EarlyStopState, StopDecision) {
        early_stop_observe(self, t, val_loss)
    }
}

/// Records `val_loss` observed at step `t`. A strict decrease below
/// `best_loss - min_delta` resets the counter; anything else increments it.
/// Signals stop exactly when the counter reaches the patience.
pub fn early_stop_observe(
    state: &EarlyStopState,
    t: usize,
    val_loss: f64,
) -> (EarlyStopState, StopDecision) {
    let mut next = *state;
    if val_loss < state.best_loss - state.min_delta {
        next.best_loss = val_loss;
        next.best_step = t;
        next.stale_count = 0;
    } else {
        next.stale_count = (state.stale_count + 1).min(state.patience);
    }
    let decision = if next.stale_count >= next.patience {
        StopDecision::Stop
    } else {
        StopDecision::Continue
    };
    (next, decision)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        let mut c = LrSchedule::constant(0.3).unwrap();
        assert_eq!(c.lr_at(0, None), 0.3);
        assert_eq!(c.lr_at(12345, Some(0.0)), 0.3);

        let mut s = LrSchedule::new(ScheduleKind::StepDecay { drop: 0.5, every_k: 10 }, 0.1).unwrap();
        assert!((s.lr_at(25, None) - 0.025).abs() < 1e-17);
        assert_eq!(s.lr_at(9, None), 0.1);

        let mut inv = LrSchedule::new(ScheduleKind::InverseT { k: 1.0 }, 0.1).unwrap();
        assert!((inv.lr_at(9, None) - 0.01).abs() < 1e-17);
    }

    #[test]
    fn threshold_anneal_reacts_to_stalled_epochs() {
        let kind = ScheduleKind::ThresholdAnneal {
            factor: 0.5,
            min_improvement: 1e-3,
        };
        let mut s = LrSchedule::new(kind, 0.2).unwrap();
        assert_eq!(s.lr_at(0, None), 0.2);
        assert_eq!(s.lr_at(10, Some(0.5)), 0.2);
        assert_eq!(s.lr_at(20, Some(1e-5)), 0.1);
        assert_eq!(s.lr_at(21, None), 0.1);
        assert_eq!(s.lr_at(30, Some(-1.0)), 0.05);
    }

    #[test]
    fn schedule_validation() {
        assert!(LrSchedule::new(ScheduleKind::StepDecay { drop: 1.0, every_k: 1 }, 0.1).is_err());
        assert!(LrSchedule::new(ScheduleKind::StepDecay { drop: 0.5, every_k: 0 }, 0.1).is_err());
        assert!(LrSchedule::new(ScheduleKind::InverseT { k: 0.0 }, 0.1).is_err());
        assert!(LrSchedule::constant(0.0).is_err());
    }

    #[test]
    fn noise_variance_examples() {
        let s = NoiseSchedule::new(0.3, 0.55, 1).unwrap();
        assert_eq!(noise_variance(&s, 0), 0.3);
        let flat = NoiseSchedule::new(0.3, 0.0, 1).unwrap();
        assert_eq!(noise_variance(&flat, 1000), 0.3);
        let unit = NoiseSchedule::new(1.0, 0.55, 1).unwrap();
        assert!((noise_variance(&unit, 99) - 0.079_432_823_472_428_15).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_is_identity() {
        let s = NoiseSchedule::new(0.0, 0.55, 9).unwrap();
        let g = GradientSample::Dense(vec![1.0, -2.0]);
        assert_eq!(apply_noise(&g, &s, 3), g);
    }

    #[test]
    fn noise_is_deterministic_and_keeps_sparsity() {
        let s = NoiseSchedule::new(0.5, 0.55, 17).unwrap();
        let g = GradientSample::sparse(100, vec![(3, 1.0), (40, 2.0)]).unwrap();
        let a = apply_noise(&g, &s, 5);
        assert_eq!(a, apply_noise(&g, &s, 5));
        assert_ne!(a, apply_noise(&g, &s, 6));
        match a {
            GradientSample::Sparse { entries, .. } => {
                assert_eq!(entries.iter().map(|e| e.0).collect::<Vec<_>>(), vec![3, 40]);
            }
            _ => panic!("sparsity lost"),
        }
    }

    fn run_stream(patience: usize, losses: &[f64]) -> (EarlyStopState, Option<usize>) {
        let mut st = EarlyStopState::new(patience).unwrap();
        for (t, &l) in losses.iter().enumerate() {
            let (next, d) = st.observe(t, l);
            st = next;
            if d == StopDecision::Stop {
                return (st, Some(t));
            }
        }
        (st, None)
    }

    #[test]
    fn early_stop_examples() {
        let (st, stop) = run_stream(3, &[1.0, 0.5, 0.6, 0.7, 0.8]);
        assert_eq!(stop, Some(4));
        assert_eq!(st.best_step, 1);
        assert_eq!(st.best_loss, 0.5);

        let (_, stop) = run_stream(1, &[1.0, 1.0]);
        assert_eq!(stop, Some(1));

        let decreasing: Vec<f64> = (0..50).map(|i| 10.0 - i as f64 * 0.1).collect();
        assert_eq!(run_stream(1, &decreasing).1, None);
    }

    #[test]
    fn min_delta_requires_larger_improvement() {
        let mut st = EarlyStopState::new(2).unwrap().with_min_delta(0.1);
        st = st.observe(0, 1.0).0;
        let (st, d) = st.observe(1, 0.95);
        assert_eq!(d, StopDecision::Continue);
        assert_eq!(st.best_loss, 1.0);
        assert_eq!(st.observe(2, 0.95).1, StopDecision::Stop);
    }
}
