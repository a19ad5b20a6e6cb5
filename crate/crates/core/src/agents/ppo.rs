use serde::{Deserialize, Serialize};

use super::loss::{loss_and_gradient, LossCoefficients, LossReport, PolicyObjective, SampleBatch};
use crate::error::{Error, Result};
use crate::nn::{clip_grad_norm, Categorical, Mlp, Optimizer};
use crate::sim::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub n_steps: usize,
    pub gae_lambda: f64,
    pub clip_range: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: Option<f64>,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.00005,
            gamma: 0.85,
            n_steps: 128,
            gae_lambda: 0.95,
            clip_range: 0.2,
            epochs: 4,
            minibatches: 4,
            value_coef: 0.5,
            entropy_coef: 0.01,
            max_grad_norm: Some(0.5),
        }
    }
}

impl PpoConfig {
    pub fn coefficients(&self) -> LossCoefficients {
        LossCoefficients {
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
        }
    }
}

/// Several epochs of shuffled minibatch descent on the clipped surrogate.
/// Advantages are normalized per minibatch. The returned report averages the
/// minibatch losses; `mean_ratio` is measured on the whole batch afterwards.
pub fn ppo_update(
    net: &mut Mlp,
    opt: &mut Optimizer,
    batch: &SampleBatch,
    cfg: &PpoConfig,
    rng: &mut RngStream,
) -> Result<LossReport> {
    let n = batch.len();
    if cfg.minibatches == 0 || cfg.minibatches > n {
        return Err(Error::Config(format!(
            "minibatches must be in 1..={n}, got {}",
            cfg.minibatches
        )));
    }
    let size = n / cfg.minibatches;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut acc = LossReport::default();
    let mut count = 0.0;
    for _ in 0..cfg.epochs {
        // Fisher–Yates with the trainer's stream.
        for i in (1..n).rev() {
            idx.swap(i, rng.index(i + 1));
        }
        for chunk in idx.chunks(size).take(cfg.minibatches) {
            let mut mb = batch.subset(chunk);
            mb.normalize_advantages();
            let (mut grads, r) = loss_and_gradient(net, &mb, cfg.coefficients(), PolicyObjective::Clipped(cfg.clip_range))?;
            let norm = match cfg.max_grad_norm {
                Some(max) => clip_grad_norm(&mut grads, max),
                None => r.grad_norm,
            };
            opt.step(net.params_mut(), &grads, cfg.learning_rate);
            acc.policy_loss += r.policy_loss;
            acc.value_loss += r.value_loss;
            acc.entropy += r.entropy;
            acc.total += r.total;
            acc.grad_norm += norm;
            acc.clip_fraction += r.clip_fraction;
            count += 1.0;
        }
    }
    if count > 0.0 {
        for v in [
            &mut acc.policy_loss,
            &mut acc.value_loss,
            &mut acc.entropy,
            &mut acc.total,
            &mut acc.grad_norm,
            &mut acc.clip_fraction,
        ] {
            *v /= count;
        }
    }
    acc.mean_ratio = mean_ratio(net, batch)?;
    Ok(acc)
}

/// Mean of `π_new(a)/π_old(a)` over the batch.
pub fn mean_ratio(net: &Mlp, batch: &SampleBatch) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..batch.len() {
        let (logits, _) = net.forward(&batch.observations[i])?;
        let logp = Categorical::from_logits(&logits).log_prob(batch.actions[i]);
        total += (logp - batch.old_log_probs[i]).exp();
    }
    Ok(total / batch.len().max(1) as f64)
}
