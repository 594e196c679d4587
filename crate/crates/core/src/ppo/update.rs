use rand::seq::SliceRandom;

use crate::env::NUM_ACTIONS;
use crate::error::{Error, Result};
use crate::neural::{adam_step, backward_into, forward, AdamConfig, AdamState, Gradients, PolicyParams};
use crate::rng::{rng_for, stream};

use super::{PpoConfig, RolloutBatch};

/// Averages over every minibatch of the update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    /// Global gradient norm before clipping.
    pub grad_norm: f64,
}

/// Clipped surrogate objective `min(r A, clip(r, 1-eps, 1+eps) A)` and
/// whether the unclipped branch is the active one (carries gradient).
pub fn clipped_surrogate(ratio: f64, advantage: f64, eps: f64) -> (f64, bool) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * advantage;
    if unclipped <= clipped {
        (unclipped, true)
    } else {
        (clipped, false)
    }
}

/// Rescales to zero mean and unit standard deviation (std floored at 1e-8).
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    adv.iter_mut().for_each(|a| *a = (*a - mean) / std);
}

/// Runs `epochs x minibatches` clipped-surrogate updates on `batch`.
pub fn ppo_update(
    params: &mut PolicyParams,
    adam: &mut AdamState,
    batch: &RolloutBatch,
    cfg: &PpoConfig,
    lr: f64,
    iteration: u64,
) -> Result<UpdateStats> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::ContractViolation("ppo update on an empty batch".into()));
    }
    let mut advantages: Vec<f64> = batch.experiences.iter().map(|e| e.advantage).collect();
    normalize_advantages(&mut advantages);

    let adam_cfg = AdamConfig { lr, eps: cfg.adam_eps, ..AdamConfig::default() };
    let mut order: Vec<usize> = (0..n).collect();
    let mut grads = Gradients::zeros();
    let mut grad_logits = vec![0.0; NUM_ACTIONS];
    let mut totals = UpdateStats::default();
    let mut updates = 0usize;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng_for(cfg.seed, &[stream::SHUFFLE, iteration, epoch as u64]));
        for mb in 0..cfg.minibatches {
            let lo = mb * n / cfg.minibatches;
            let hi = (mb + 1) * n / cfg.minibatches;
            let scale = 1.0 / (hi - lo) as f64;
            grads.fill_zero();
            let mut stats = UpdateStats::default();

            for &idx in &order[lo..hi] {
                let exp = &batch.experiences[idx];
                let adv = advantages[idx];
                let trace = forward(params, &exp.observation)?;
                let log_ratio = trace.log_policy[exp.action] - exp.log_prob;
                let ratio = log_ratio.exp();
                let (surrogate, unclipped_active) = clipped_surrogate(ratio, adv, cfg.clip_epsilon);
                let entropy = trace.entropy();
                let value_err = trace.value - exp.ret;

                stats.policy_loss -= surrogate;
                stats.value_loss += value_err * value_err;
                stats.entropy += entropy;
                stats.approx_kl += (ratio - 1.0) - log_ratio;
                if (ratio - 1.0).abs() > cfg.clip_epsilon {
                    stats.clip_fraction += 1.0;
                }

                // d loss / d logits: surrogate term through log pi(a), entropy bonus
                let policy_coef = if unclipped_active { -adv * ratio } else { 0.0 };
                for k in 0..NUM_ACTIONS {
                    let p = trace.policy[k];
                    let onehot = if k == exp.action { 1.0 } else { 0.0 };
                    let g_pg = policy_coef * (onehot - p);
                    let g_ent = cfg.entropy_coeff * p * (trace.log_policy[k] + entropy);
                    grad_logits[k] = scale * (g_pg + g_ent);
                }
                let grad_value = scale * 2.0 * cfg.value_coeff * value_err;
                backward_into(params, &trace, &grad_logits, grad_value, &mut grads)?;
            }

            let loss = scale
                * (stats.policy_loss + cfg.value_coeff * stats.value_loss
                    - cfg.entropy_coeff * stats.entropy);
            let norm = grads.norm();
            if !loss.is_finite() || !norm.is_finite() {
                return Err(Error::NonFiniteLoss {
                    iteration: iteration as usize,
                    detail: format!(
                        "epoch {epoch} minibatch {mb}: loss {loss}, gradient norm {norm}"
                    ),
                });
            }
            if norm > cfg.grad_clip_norm {
                grads.scale(cfg.grad_clip_norm / norm);
            }
            adam_step(params, &grads, adam, &adam_cfg);

            totals.policy_loss += scale * stats.policy_loss;
            totals.value_loss += scale * stats.value_loss;
            totals.entropy += scale * stats.entropy;
            totals.approx_kl += scale * stats.approx_kl;
            totals.clip_fraction += scale * stats.clip_fraction;
            totals.grad_norm += norm;
            updates += 1;
        }
    }
    let k = updates as f64;
    Ok(UpdateStats {
        policy_loss: totals.policy_loss / k,
        value_loss: totals.value_loss / k,
        entropy: totals.entropy / k,
        approx_kl: totals.approx_kl / k,
        clip_fraction: totals.clip_fraction / k,
        grad_norm: totals.grad_norm / k,
    })
}
