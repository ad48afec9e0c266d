//! First-order update rules.
//!
//! Every rule is a pure function from `(state, θ, g)` to `(state', θ')`.
//! States are plain values; nothing is mutated in place, so a step can be
//! replayed from the same inputs and produce identical outputs.
//!
//! Accumulators start at zero. Step counters start at 0 and are incremented
//! before bias correction, so the first update uses `1 - β`.
//!
//! The smoothing term ε sits inside the square root for Adagrad, Adadelta
//! and RMSprop and outside it for Adam and Nadam. AdaMax has none.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::types::{GradientSample, ParamVector};

/// Selector for one of the bundled update rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    Momentum,
    Nag,
    NagModified,
    Adagrad,
    Adadelta,
    Rmsprop,
    Adam,
    Adamax,
    Nadam,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 10] = [
        OptimizerKind::Sgd,
        OptimizerKind::Momentum,
        OptimizerKind::Nag,
        OptimizerKind::NagModified,
        OptimizerKind::Adagrad,
        OptimizerKind::Adadelta,
        OptimizerKind::Rmsprop,
        OptimizerKind::Adam,
        OptimizerKind::Adamax,
        OptimizerKind::Nadam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Momentum => "momentum",
            OptimizerKind::Nag => "nag",
            OptimizerKind::NagModified => "nag-mod",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::Rmsprop => "rmsprop",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adamax => "adamax",
            OptimizerKind::Nadam => "nadam",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|k| k.name()).collect()
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown optimizer `{s}`; valid names: {}",
                    Self::names().join(", ")
                ))
            })
    }
}

/// Hyperparameters shared by the update rules. Each rule reads the subset
/// it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Learning rate η.
    pub eta: f64,
    /// Momentum or decay-average coefficient γ.
    pub gamma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl HyperParams {
    /// Default hyperparameters for `kind`.
    pub fn defaults(kind: OptimizerKind) -> Self {
        let base = HyperParams {
            eta: 0.01,
            gamma: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        };
        match kind {
            OptimizerKind::Sgd
            | OptimizerKind::Momentum
            | OptimizerKind::Nag
            | OptimizerKind::NagModified
            | OptimizerKind::Adagrad
            | OptimizerKind::Adadelta => base,
            OptimizerKind::Rmsprop | OptimizerKind::Adam | OptimizerKind::Nadam => HyperParams {
                eta: 0.001,
                ..base
            },
            OptimizerKind::Adamax => HyperParams {
                eta: 0.002,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("eta must be positive, got {}", self.eta)));
        }
        check_unit("gamma", self.gamma)?;
        check_unit("beta1", self.beta1)?;
        check_unit("beta2", self.beta2)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must lie in [0, 1), got {value}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumVariant {
    Classic,
    Nag,
    NagModified,
}

/// Update vector `v` of the momentum family.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub v: Vec<f64>,
    pub variant: MomentumVariant,
}

impl MomentumState {
    pub fn new(dim: usize, variant: MomentumVariant) -> Self {
        MomentumState {
            v: vec![0.0; dim],
            variant,
        }
    }
}

/// Diagonal of the running sum of squared gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct AdagradState {
    pub g2_sum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    /// Decaying average of squared gradients.
    pub eg2: Vec<f64>,
    /// Decaying average of squared parameter updates.
    pub edx2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmspropState {
    pub eg2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamaxState {
    pub m: Vec<f64>,
    /// Infinity-norm accumulator.
    pub u: Vec<f64>,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NadamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

/// Per-algorithm accumulator bundle.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState {
    Sgd { dim: usize },
    Momentum(MomentumState),
    Adagrad(AdagradState),
    Adadelta(AdadeltaState),
    Rmsprop(RmspropState),
    Adam(AdamState),
    Adamax(AdamaxState),
    Nadam(NadamState),
}

impl OptimizerState {
    /// Zero-initialized state for `kind` in dimension `dim`.
    pub fn new(kind: OptimizerKind, dim: usize) -> Self {
        let zeros = || vec![0.0; dim];
        match kind {
            OptimizerKind::Sgd => OptimizerState::Sgd { dim },
            OptimizerKind::Momentum => {
                OptimizerState::Momentum(MomentumState::new(dim, MomentumVariant::Classic))
            }
            OptimizerKind::Nag => {
                OptimizerState::Momentum(MomentumState::new(dim, MomentumVariant::Nag))
            }
            OptimizerKind::NagModified => {
                OptimizerState::Momentum(MomentumState::new(dim, MomentumVariant::NagModified))
            }
            OptimizerKind::Adagrad => OptimizerState::Adagrad(AdagradState { g2_sum: zeros() }),
            OptimizerKind::Adadelta => OptimizerState::Adadelta(AdadeltaState {
                eg2: zeros(),
                edx2: zeros(),
            }),
            OptimizerKind::Rmsprop => OptimizerState::Rmsprop(RmspropState { eg2: zeros() }),
            OptimizerKind::Adam => OptimizerState::Adam(AdamState {
                m: zeros(),
                v: zeros(),
                t: 0,
            }),
            OptimizerKind::Adamax => OptimizerState::Adamax(AdamaxState {
                m: zeros(),
                u: zeros(),
                t: 0,
            }),
            OptimizerKind::Nadam => OptimizerState::Nadam(NadamState {
                m: zeros(),
                v: zeros(),
                t: 0,
            }),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OptimizerState::Sgd { dim } => *dim,
            OptimizerState::Momentum(s) => s.v.len(),
            OptimizerState::Adagrad(s) => s.g2_sum.len(),
            OptimizerState::Adadelta(s) => s.eg2.len(),
            OptimizerState::Rmsprop(s) => s.eg2.len(),
            OptimizerState::Adam(s) => s.m.len(),
            OptimizerState::Adamax(s) => s.m.len(),
            OptimizerState::Nadam(s) => s.m.len(),
        }
    }
}

fn prepare(theta: &ParamVector, g: &GradientSample, state_dim: usize) -> Result<Vec<f64>> {
    check_dim(state_dim, theta.dim())?;
    check_dim(theta.dim(), g.dim())?;
    g.check_finite()?;
    Ok(g.to_dense())
}

fn finish(values: Vec<f64>) -> Result<ParamVector> {
    ParamVector::new(values)
}

fn bias_correction(beta: f64, t: u64) -> f64 {
    1.0 - beta.powi(t.min(i32::MAX as u64) as i32)
}

/// Plain gradient step `θ' = θ - η g`. Sparse gradients touch only their
/// stored coordinates.
pub fn sgd_step(theta: &ParamVector, g: &GradientSample, eta: f64) -> Result<ParamVector> {
    check_dim(theta.dim(), g.dim())?;
    g.check_finite()?;
    let mut next = theta.to_vec();
    match g {
        GradientSample::Dense(gv) => {
            for (x, gi) in next.iter_mut().zip(gv) {
                *x -= eta * gi;
            }
        }
        GradientSample::Sparse { entries, .. } => {
            for &(i, gi) in entries {
                next[i] -= eta * gi;
            }
        }
    }
    finish(next)
}

fn expect_variant(state: &MomentumState, want: MomentumVariant) -> Result<()> {
    if state.variant == want {
        Ok(())
    } else {
        Err(Error::config(format!(
            "momentum state variant {:?} used with {:?} update",
            state.variant, want
        )))
    }
}

/// Classical momentum: `v' = γv + ηg`, `θ' = θ - v'`.
pub fn momentum_step(
    state: &MomentumState,
    theta: &ParamVector,
    g: &GradientSample,
    eta: f64,
    gamma: f64,
) -> Result<(MomentumState, ParamVector)> {
    check_unit("gamma", gamma)?;
    expect_variant(state, MomentumVariant::Classic)?;
    let g = prepare(theta, g, state.v.len())?;
    let v: Vec<f64> = state
        .v
        .iter()
        .zip(&g)
        .map(|(vi, gi)| gamma * vi + eta * gi)
        .collect();
    check_finite(&v)?;
    let next = theta.iter().zip(&v).map(|(x, vi)| x - vi).collect();
    Ok((
        MomentumState {
            v,
            variant: state.variant,
        },
        finish(next)?,
    ))
}

/// Nesterov accelerated gradient. `grad_fn` is evaluated once, at the
/// look-ahead point `θ - γv`.
pub fn nag_step<F>(
    state: &MomentumState,
    theta: &ParamVector,
    grad_fn: F,
    eta: f64,
    gamma: f64,
) -> Result<(MomentumState, ParamVector)>
where
    F: FnOnce(&ParamVector) -> Result<GradientSample>,
{
    check_unit("gamma", gamma)?;
    expect_variant(state, MomentumVariant::Nag)?;
    check_dim(state.v.len(), theta.dim())?;
    let lookahead = theta
        .iter()
        .zip(&state.v)
        .map(|(x, vi)| x - gamma * vi)
        .collect();
    let g = grad_fn(&finish(lookahead)?)?;
    let g = prepare(theta, &g, state.v.len())?;
    let v: Vec<f64> = state
        .v
        .iter()
        .zip(&g)
        .map(|(vi, gi)| gamma * vi + eta * gi)
        .collect();
    check_finite(&v)?;
    let next = theta.iter().zip(&v).map(|(x, vi)| x - vi).collect();
    Ok((
        MomentumState {
            v,
            variant: state.variant,
        },
        finish(next)?,
    ))
}

/// Look-ahead momentum applied directly to the current parameters:
/// `v' = γv + ηg`, `θ' = θ - (γv' + ηg)` with `g` taken at `θ`.
pub fn nag_modified_step(
    state: &MomentumState,
    theta: &ParamVector,
    g: &GradientSample,
    eta: f64,
    gamma: f64,
) -> Result<(MomentumState, ParamVector)> {
    check_unit("gamma", gamma)?;
    expect_variant(state, MomentumVariant::NagModified)?;
    let g = prepare(theta, g, state.v.len())?;
    let v: Vec<f64> = state
        .v
        .iter()
        .zip(&g)
        .map(|(vi, gi)| gamma * vi + eta * gi)
        .collect();
    check_finite(&v)?;
    let next = theta
        .iter()
        .zip(&v)
        .zip(&g)
        .map(|((x, vi), gi)| x - (gamma * vi + eta * gi))
        .collect();
    Ok((
        MomentumState {
            v,
            variant: state.variant,
        },
        finish(next)?,
    ))
}

/// `G' = G + g²`, `θ' = θ - η g / √(G' + ε)`.
pub fn adagrad_step(
    state: &AdagradState,
    theta: &ParamVector,
    g: &GradientSample,
    eta: f64,
    epsilon: f64,
) -> Result<(AdagradState, ParamVector)> {
    let g = prepare(theta, g, state.g2_sum.len())?;
    let g2_sum: Vec<f64> = state
        .g2_sum
        .iter()
        .zip(&g)
        .map(|(s, gi)| s + gi * gi)
        .collect();
    let next = theta
        .iter()
        .zip(&g)
        .zip(&g2_sum)
        .map(|((x, gi), s)| x - eta * gi / (s + epsilon).sqrt())
        .collect();
    Ok((AdagradState { g2_sum }, finish(next)?))
}

/// Adadelta. No learning rate enters the update; the step scale comes from
/// the RMS of past updates over the RMS of gradients.
pub fn adadelta_step(
    state: &AdadeltaState,
    theta: &ParamVector,
    g: &GradientSample,
    gamma: f64,
    epsilon: f64,
) -> Result<(AdadeltaState, ParamVector)> {
    check_unit("gamma", gamma)?;
    let g = prepare(theta, g, state.eg2.len())?;
    let d = g.len();
    let mut eg2 = Vec::with_capacity(d);
    let mut edx2 = Vec::with_capacity(d);
    let mut next = Vec::with_capacity(d);
    for i in 0..d {
        let gi = g[i];
        let eg2_i = gamma * state.eg2[i] + (1.0 - gamma) * gi * gi;
        let rms_g = (eg2_i + epsilon).sqrt();
        let rms_dx = (state.edx2[i] + epsilon).sqrt();
        let delta = -(rms_dx / rms_g) * gi;
        eg2.push(eg2_i);
        edx2.push(gamma * state.edx2[i] + (1.0 - gamma) * delta * delta);
        next.push(theta[i] + delta);
    }
    Ok((AdadeltaState { eg2, edx2 }, finish(next)?))
}

/// `E[g²]' = γE[g²] + (1-γ)g²`, `θ' = θ - η g / √(E[g²]' + ε)`.
pub fn rmsprop_step(
    state: &RmspropState,
    theta: &ParamVector,
    g: &GradientSample,
    eta: f64,
    gamma: f64,
    epsilon: f64,
) -> Result<(RmspropState, ParamVector)> {
    check_unit("gamma", gamma)?;
    let g = prepare(theta, g, state.eg2.len())?;
    let eg2: Vec<f64> = state
        .eg2
        .iter()
        .zip(&g)
        .map(|(e, gi)| gamma * e + (1.0 - gamma) * gi * gi)
        .collect();
    let next = theta
        .iter()
        .zip(&g)
        .zip(&eg2)
        .map(|((x, gi), e)| x - eta * gi / (e + epsilon).sqrt())
        .collect();
    Ok((RmspropState { eg2 }, finish(next)?))
}

/// Adam with bias-corrected moments.
pub fn adam_step(
    state: &AdamState,
    theta: &ParamVector,
    g: &GradientSample,
    eta: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
) -> Result<(AdamState, ParamVector)> {
    check_unit("beta1", beta1)?;
    check_unit("beta2", beta2)?;
    let g = prepare(theta, g, state.m.len())?;
    let t = state.t + 1;
    let c1 = bias_correction(beta1, t);
    let c2 = bias_correction(beta2, t);
    let d = g.len();
    let mut m = Vec::with_capacity(d);
    let mut v = Vec::with_capacity(d);
    let mut next = Vec::with_capacity(d);
    for i in 0..d {
        let gi = g[i];
        let mi = beta1 * state.m[i] + (1.0 - beta1) * gi;
        let vi = beta2 * state.v[i] + (1.0 - beta2) * gi * gi;
        let m_hat = mi / c1;
        let v_hat = vi / c2;
        next.push(theta[i] - eta * m_hat / (v_hat.sqrt() + epsilon));
        m.push(mi);
        v.push(vi);
    }
    Ok((AdamState { m, v, t }, finish(next)?))
}

/// AdaMax: `u' = max(β₂u, |g|)` with no bias correction on `u`. A
/// coordinate whose accumulator is still zero has only ever seen zero
/// gradients and is left unchanged.
pub fn adamax_step(
    state: &AdamaxState,
    theta: &ParamVector,
    g: &GradientSample,
    eta: f64,
    beta1: f64,
    beta2: f64,
) -> Result<(AdamaxState, ParamVector)> {
    check_unit("beta1", beta1)?;
    check_unit("beta2", beta2)?;
    let g = prepare(theta, g, state.m.len())?;
    let t = state.t + 1;
    let c1 = bias_correction(beta1, t);
    let d = g.len();
    let mut m = Vec::with_capacity(d);
    let mut u = Vec::with_capacity(d);
    let mut next = Vec::with_capacity(d);
    for i in 0..d {
        let gi = g[i];
        let mi = beta1 * state.m[i] + (1.0 - beta1) * gi;
        let ui = (beta2 * state.u[i]).max(gi.abs());
        let xi = if ui == 0.0 {
            theta[i]
        } else {
            theta[i] - (eta / ui) * (mi / c1)
        };
        m.push(mi);
        u.push(ui);
        next.push(xi);
    }
    Ok((AdamaxState { m, u, t }, finish(next)?))
}

/// Nadam: Adam with the bias-corrected current momentum used as look-ahead.
pub fn nadam_step(
    state: &NadamState,
    theta: &ParamVector,
    g: &GradientSample,
    eta: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
) -> Result<(NadamState, ParamVector)> {
    check_unit("beta1", beta1)?;
    check_unit("beta2", beta2)?;
    let g = prepare(theta, g, state.m.len())?;
    let t = state.t + 1;
    let c1 = bias_correction(beta1, t);
    let c2 = bias_correction(beta2, t);
    let d = g.len();
    let mut m = Vec::with_capacity(d);
    let mut v = Vec::with_capacity(d);
    let mut next = Vec::with_capacity(d);
    for i in 0..d {
        let gi = g[i];
        let mi = beta1 * state.m[i] + (1.0 - beta1) * gi;
        let vi = beta2 * state.v[i] + (1.0 - beta2) * gi * gi;
        let m_hat = mi / c1;
        let v_hat = vi / c2;
        let lookahead = beta1 * m_hat + (1.0 - beta1) * gi / c1;
        next.push(theta[i] - eta * lookahead / (v_hat.sqrt() + epsilon));
        m.push(mi);
        v.push(vi);
    }
    Ok((NadamState { m, v, t }, finish(next)?))
}

/// An update rule together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub hyper: HyperParams,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind) -> Self {
        Optimizer {
            kind,
            hyper: HyperParams::defaults(kind),
        }
    }

    pub fn with_hyper(kind: OptimizerKind, hyper: HyperParams) -> Result<Self> {
        hyper.validate()?;
        Ok(Optimizer { kind, hyper })
    }

    pub fn init_state(&self, dim: usize) -> OptimizerState {
        OptimizerState::new(self.kind, dim)
    }

    /// Advances one step using learning rate `eta` (ignored by Adadelta).
    ///
    /// `grad_fn` is called exactly once: at the look-ahead point for NAG and
    /// at `theta` for every other rule.
    pub fn step(
        &self,
        state: &OptimizerState,
        theta: &ParamVector,
        eta: f64,
        grad_fn: &mut dyn FnMut(&ParamVector) -> Result<GradientSample>,
    ) -> Result<(OptimizerState, ParamVector)> {
        check_dim(state.dim(), theta.dim())?;
        let h = &self.hyper;
        let mismatch = || {
            Error::config(format!(
                "optimizer state does not belong to `{}`",
                self.kind
            ))
        };
        Ok(match (self.kind, state) {
            (OptimizerKind::Sgd, OptimizerState::Sgd { dim }) => {
                let g = grad_fn(theta)?;
                (OptimizerState::Sgd { dim: *dim }, sgd_step(theta, &g, eta)?)
            }
            (OptimizerKind::Momentum, OptimizerState::Momentum(s)) => {
                let g = grad_fn(theta)?;
                let (s, x) = momentum_step(s, theta, &g, eta, h.gamma)?;
                (OptimizerState::Momentum(s), x)
            }
            (OptimizerKind::Nag, OptimizerState::Momentum(s)) => {
                let (s, x) = nag_step(s, theta, |p| grad_fn(p), eta, h.gamma)?;
                (OptimizerState::Momentum(s), x)
            }
            (OptimizerKind::NagModified, OptimizerState::Momentum(s)) => {
                let g = grad_fn(theta)?;
                let (s, x) = nag_modified_step(s, theta, &g, eta, h.gamma)?;
                (OptimizerState::Momentum(s), x)
            }
            (OptimizerKind::Adagrad, OptimizerState::Adagrad(s)) => {
                let g = grad_fn(theta)?;
                let (s, x) = adagrad_step(s, theta, &g, eta, h.epsilon)?;
                (OptimizerState::Adagrad(s), x)
            }
            (OptimizerKind::Adadelta, OptimizerState::Adadelta(s)) => {
                let g = grad_fn(theta)?;
                let (s, x) = adadelta_step(s, theta, &g, h.gamma, h.epsilon)?;
                (OptimizerState::Adadelta(s), x)
            }
            (OptimizerKind::Rmsprop, OptimizerState::Rmsprop(s)) => {
                let g = grad_fn(theta)?;
                let (s, x) = rmsprop_step(s, theta, &g, eta, h.gamma, h.epsilon)?;
                (OptimizerState::Rmsprop(s), x)
            }
            (OptimizerKind::Adam, OptimizerState::Adam(s)) => {
                let g = grad_fn(theta)?;
                let (s, x) = adam_step(s, theta, &g, eta, h.beta1, h.beta2, h.epsilon)?;
                (OptimizerState::Adam(s), x)
            }
            (OptimizerKind::Adamax, OptimizerState::Adamax(s)) => {
                let g = grad_fn(theta)?;
                let (s, x) = adamax_step(s, theta, &g, eta, h.beta1, h.beta2)?;
                (OptimizerState::Adamax(s), x)
            }
            (OptimizerKind::Nadam, OptimizerState::Nadam(s)) => {
                let g = grad_fn(theta)?;
                let (s, x) = nadam_step(s, theta, &g, eta, h.beta1, h.beta2, h.epsilon)?;
                (OptimizerState::Nadam(s), x)
            }
            _ => return Err(mismatch()),
        })
    }
}

/// Free-function form of [`Optimizer::step`].
pub fn optimizer_step(
    optimizer: &Optimizer,
    state: &OptimizerState,
    theta: &ParamVector,
    eta: f64,
    grad_fn: &mut dyn FnMut(&ParamVector) -> Result<GradientSample>,
) -> Result<(OptimizerState, ParamVector)> {
    optimizer.step(state, theta, eta, grad_fn)
}
