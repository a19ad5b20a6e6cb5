use serde::{Deserialize, Serialize};

use super::loss::{loss_and_gradient, LossCoefficients, LossReport, PolicyObjective, SampleBatch};
use crate::error::Result;
use crate::nn::{clip_grad_norm, Mlp, Optimizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct A2cConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    /// Steps per worker between updates.
    pub n_steps: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: Option<f64>,
}

impl Default for A2cConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.00005,
            gamma: 0.99,
            n_steps: 5,
            value_coef: 0.5,
            entropy_coef: 0.01,
            max_grad_norm: Some(0.5),
        }
    }
}

impl A2cConfig {
    pub fn coefficients(&self) -> LossCoefficients {
        LossCoefficients {
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
        }
    }
}

/// One synchronous update on the pooled samples of all workers, with raw
/// (unnormalized) advantages.
pub fn a2c_update(net: &mut Mlp, opt: &mut Optimizer, batch: &SampleBatch, cfg: &A2cConfig) -> Result<LossReport> {
    let (mut grads, mut report) = loss_and_gradient(net, batch, cfg.coefficients(), PolicyObjective::VanillaPg)?;
    if let Some(max) = cfg.max_grad_norm {
        report.grad_norm = clip_grad_norm(&mut grads, max);
    }
    opt.step(net.params_mut(), &grads, cfg.learning_rate);
    Ok(report)
}
