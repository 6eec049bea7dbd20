//! Clipped-surrogate loss, its analytic gradient, and the epoch/minibatch loop.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::network::{log_softmax, PolicyNetwork};
use super::rollout::TrajectoryBatch;
use super::PPOConfig;
use crate::error::{Error, Result};

/// One training tuple as seen by the loss.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub observation: &'a [f64],
    pub action: usize,
    pub old_logprob: f64,
    pub advantage: f64,
    pub target_return: f64,
}

/// Minibatch means of the loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// `-mean(min(r·A, clip(r)·A))`
    pub policy_loss: f64,
    /// `mean((V - R)²)`, before the value coefficient.
    pub value_loss: f64,
    pub entropy: f64,
    pub total: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Averages over every minibatch of an update.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateMetrics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
    pub minibatches: usize,
}

/// Loss `policy_loss + c_v·value_loss − β·entropy` over `samples` and its
/// gradient with respect to every network parameter.
pub fn minibatch_loss(net: &PolicyNetwork, samples: &[Sample<'_>], cfg: &PPOConfig) -> (LossBreakdown, Vec<f64>) {
    let mut grad = vec![0.0; net.param_count()];
    let mut cache = net.new_cache();
    let mut scratch = Vec::new();
    let mut d_logits = vec![0.0; net.actions()];
    let mut out = LossBreakdown::default();
    let n = samples.len() as f64;
    let eps = cfg.clip_epsilon;

    for s in samples {
        net.forward_into(s.observation, &mut cache);
        let logp = log_softmax(&cache.logits);
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let entropy: f64 = -probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();

        let log_ratio = logp[s.action] - s.old_logprob;
        let ratio = log_ratio.exp();
        let unclipped = ratio * s.advantage;
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * s.advantage;
        let surrogate = unclipped.min(clipped);
        // gradient flows through the ratio only when the unclipped term is the minimum
        let d_logp = if unclipped <= clipped { -s.advantage * ratio } else { 0.0 };

        for k in 0..d_logits.len() {
            let onehot = if k == s.action { 1.0 } else { 0.0 };
            d_logits[k] = (d_logp * (onehot - probs[k]) + cfg.entropy_coeff * probs[k] * (logp[k] + entropy)) / n;
        }
        let v_err = cache.value - s.target_return;
        let d_value = 2.0 * cfg.value_coeff * v_err / n;
        net.backward(s.observation, &cache, &d_logits, d_value, &mut grad, &mut scratch);

        out.policy_loss -= surrogate / n;
        out.value_loss += v_err * v_err / n;
        out.entropy += entropy / n;
        out.approx_kl -= log_ratio / n;
        if (ratio - 1.0).abs() > eps {
            out.clip_fraction += 1.0 / n;
        }
    }
    out.total = out.policy_loss + cfg.value_coeff * out.value_loss - cfg.entropy_coeff * out.entropy;
    (out, grad)
}

fn normalise(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt() + 1e-8;
    values.iter().map(|v| (v - mean) / sd).collect()
}

/// Runs `epochs_per_update` shuffled passes of minibatch gradient steps.
/// Advantages are normalised to zero mean and unit variance first. A
/// non-finite loss aborts before any parameter is touched for that
/// minibatch.
#[allow(clippy::too_many_arguments)]
pub fn ppo_update(
    net: &mut PolicyNetwork,
    optimizer: &mut Adam,
    batch: &TrajectoryBatch,
    advantages: &[f64],
    returns: &[f64],
    cfg: &PPOConfig,
    rng: &mut impl Rng,
) -> Result<UpdateMetrics> {
    let n = batch.len();
    assert_eq!(advantages.len(), n);
    assert_eq!(returns.len(), n);
    let adv = normalise(advantages);
    let mut order: Vec<usize> = (0..n).collect();
    let mut m = UpdateMetrics::default();
    let mb = cfg.minibatch_size.min(n).max(1);

    for _ in 0..cfg.epochs_per_update {
        order.shuffle(rng);
        for chunk in order.chunks(mb) {
            let samples: Vec<Sample<'_>> = chunk
                .iter()
                .map(|&i| Sample {
                    observation: batch.observation(i),
                    action: batch.actions[i],
                    old_logprob: batch.logprobs[i],
                    advantage: adv[i],
                    target_return: returns[i],
                })
                .collect();
            let (loss, mut grad) = minibatch_loss(net, &samples, cfg);
            if !loss.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss(format!(
                    "policy {} value {} entropy {}",
                    loss.policy_loss, loss.value_loss, loss.entropy
                )));
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > cfg.max_grad_norm {
                let scale = cfg.max_grad_norm / norm;
                grad.iter_mut().for_each(|g| *g *= scale);
            }
            optimizer.step(net.params_mut(), &grad);

            m.policy_loss += loss.policy_loss;
            m.value_loss += loss.value_loss;
            m.entropy += loss.entropy;
            m.approx_kl += loss.approx_kl;
            m.clip_fraction += loss.clip_fraction;
            m.grad_norm += norm;
            m.minibatches += 1;
        }
    }
    if m.minibatches > 0 {
        let k = m.minibatches as f64;
        m.policy_loss /= k;
        m.value_loss /= k;
        m.entropy /= k;
        m.approx_kl /= k;
        m.clip_fraction /= k;
        m.grad_norm /= k;
    }
    Ok(m)
}
