use serde::{Deserialize, Serialize};

use super::encoder::TwinEncoderParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub grad_clip_norm: f64,
    pub epochs: usize,
    pub iterations_per_epoch: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 1e-2,
            momentum: 0.9,
            weight_decay: 1e-5,
            grad_clip_norm: 1.0,
            epochs: 100,
            iterations_per_epoch: 32,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        // lr = 0 is allowed: it freezes the parameters, which the CLI tests use.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be >= 0, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "weight decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        if !(self.grad_clip_norm > 0.0) {
            return Err(Error::Config(format!(
                "gradient clip norm must be > 0, got {}",
                self.grad_clip_norm
            )));
        }
        if self.epochs == 0 || self.iterations_per_epoch == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs, iterations_per_epoch and batch_size must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Momentum buffers, one per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub velocity: TwinEncoderParams,
}

impl MomentumState {
    pub fn new(params: &TwinEncoderParams) -> Self {
        MomentumState {
            velocity: params.zeros_like(),
        }
    }
}

/// Factor that rescales a gradient of norm `norm` to at most `max_norm`.
pub fn clip_factor(norm: f64, max_norm: f64) -> f64 {
    if norm > max_norm {
        max_norm / norm
    } else {
        1.0
    }
}

/// `v ← μ·v + s·g`, `p ← p − lr·(v + λ·p)` over one flat tensor, where `s`
/// is the clip factor.
pub fn sgd_update(
    params: &mut [f64],
    grads: &[f64],
    velocity: &mut [f64],
    clip: f64,
    cfg: &OptimizerConfig,
) {
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        *v = cfg.momentum * *v + clip * g;
        *p -= cfg.learning_rate * (*v + cfg.weight_decay * *p);
    }
}

/// One momentum-SGD step over both encoders, after clipping the global
/// gradient norm. Returns the clip factor applied.
pub fn sgd_step(
    params: &mut TwinEncoderParams,
    grads: &TwinEncoderParams,
    state: &mut MomentumState,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    let shapes_match = params
        .tensors()
        .iter()
        .zip(grads.tensors())
        .zip(state.velocity.tensors())
        .all(|((p, g), v)| p.shape() == g.shape() && p.shape() == v.shape());
    if !shapes_match {
        return Err(Error::shape(
            "sgd_step",
            "matching parameter/gradient/state shapes",
            "mismatch",
        ));
    }
    let clip = clip_factor(grads.global_norm(), cfg.grad_clip_norm);
    for ((p, g), v) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.velocity.tensors_mut())
    {
        sgd_update(p.as_mut_slice(), g.as_slice(), v.as_mut_slice(), clip, cfg);
    }
    Ok(clip)
}
