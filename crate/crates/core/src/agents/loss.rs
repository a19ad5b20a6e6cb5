use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Categorical, GradientTape, Mlp, OutputGradient};

/// Flattened training samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleBatch {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub old_log_probs: Vec<f64>,
    pub returns: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> SampleBatch {
        SampleBatch {
            observations: idx.iter().map(|&i| self.observations[i].clone()).collect(),
            actions: idx.iter().map(|&i| self.actions[i]).collect(),
            old_log_probs: idx.iter().map(|&i| self.old_log_probs[i]).collect(),
            returns: idx.iter().map(|&i| self.returns[i]).collect(),
            advantages: idx.iter().map(|&i| self.advantages[i]).collect(),
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Usage("empty sample batch".into()));
        }
        if [self.observations.len(), self.old_log_probs.len(), self.returns.len(), self.advantages.len()]
            .iter()
            .any(|&m| m != n)
        {
            return Err(Error::Usage("sample batch columns differ in length".into()));
        }
        Ok(())
    }

    /// Rescales advantages to zero mean and unit deviation.
    pub fn normalize_advantages(&mut self) {
        let n = self.advantages.len() as f64;
        if n == 0.0 {
            return;
        }
        let mean = self.advantages.iter().sum::<f64>() / n;
        let var = self.advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt() + 1e-8;
        for a in &mut self.advantages {
            *a = (*a - mean) / std;
        }
    }
}

/// Coefficients shared by both losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossCoefficients {
    pub value_coef: f64,
    pub entropy_coef: f64,
}

/// Batch means of the loss terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LossReport {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub total: f64,
    /// Gradient norm before clipping.
    pub grad_norm: f64,
    /// Mean probability ratio against the behaviour policy.
    pub mean_ratio: f64,
    /// Share of samples whose ratio fell outside the clip range.
    pub clip_fraction: f64,
}

/// `exp(log π_new - log π_old)`.
pub fn ppo_ratio(new_log_prob: f64, old_log_prob: f64) -> f64 {
    (new_log_prob - old_log_prob).exp()
}

/// Clipped surrogate objective of one sample, `min(r·A, clip(r, 1-ε, 1+ε)·A)`.
/// The training loss is its negative mean.
pub fn ppo_clip_loss(ratio: f64, advantage: f64, clip_range: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip_range, 1.0 + clip_range);
    (ratio * advantage).min(clipped * advantage)
}

/// Which policy objective a batch loss uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyObjective {
    /// `-log π(a)·A`.
    VanillaPg,
    /// Clipped surrogate with the given ε.
    Clipped(f64),
}

/// Batch loss `mean(policy) + c_v·mean((V-R)²) - c_e·mean(H)` and its exact
/// parameter gradient.
pub fn loss_and_gradient(
    net: &Mlp,
    batch: &SampleBatch,
    coef: LossCoefficients,
    objective: PolicyObjective,
) -> Result<(Vec<f64>, LossReport)> {
    batch.check()?;
    let n = batch.len() as f64;
    let mut tape = GradientTape::new();
    let mut outputs = Vec::with_capacity(batch.len());
    let mut report = LossReport::default();
    for i in 0..batch.len() {
        let act = tape.forward(net, &batch.observations[i])?;
        let dist = Categorical::from_logits(&act.logits);
        let a = batch.actions[i];
        if a >= dist.len() {
            return Err(Error::Usage(format!("action {a} outside {} logits", dist.len())));
        }
        let (logp, entropy) = dist.log_prob_entropy(a);
        let adv = batch.advantages[i];
        let ratio = ppo_ratio(logp, batch.old_log_probs[i]);
        // Derivative of the per-sample policy term with respect to log π(a).
        let (policy_loss, dpolicy) = match objective {
            PolicyObjective::VanillaPg => (-logp * adv, -adv),
            PolicyObjective::Clipped(eps) => {
                let loss = -ppo_clip_loss(ratio, adv, eps);
                let unclipped = ratio * adv;
                let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
                if (ratio - 1.0).abs() > eps {
                    report.clip_fraction += 1.0;
                }
                (loss, if unclipped <= clipped { -ratio * adv } else { 0.0 })
            }
        };
        let err = act.value - batch.returns[i];
        report.policy_loss += policy_loss / n;
        report.value_loss += err * err / n;
        report.entropy += entropy / n;
        report.mean_ratio += ratio / n;

        let glogp = dist.log_prob_grad(a);
        let gent = dist.entropy_grad();
        let dlogits = glogp
            .iter()
            .zip(&gent)
            .map(|(gl, ge)| (dpolicy * gl - coef.entropy_coef * ge) / n)
            .collect();
        outputs.push(OutputGradient {
            dlogits,
            dvalue: coef.value_coef * 2.0 * err / n,
        });
    }
    report.clip_fraction /= n;
    report.total = report.policy_loss + coef.value_coef * report.value_loss - coef.entropy_coef * report.entropy;
    let grads = tape.backward(net, &outputs)?;
    report.grad_norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok((grads, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::MlpShape;
    use crate::sim::RngStream;
    use proptest::prelude::*;

    fn setup(seed: u64) -> (Mlp, SampleBatch) {
        let mut rng = RngStream::new(seed, 0);
        let mut net = Mlp::new(MlpShape { input: 5, hidden: vec![8, 8], actions: 4 }, &mut rng);
        // Larger head weights so policy gradients are not vanishingly small.
        for p in net.params_mut() {
            *p *= 3.0;
        }
        let n = 6;
        let batch = SampleBatch {
            observations: (0..n).map(|_| (0..5).map(|_| rng.uniform_range(-1.0, 1.0)).collect()).collect(),
            actions: (0..n).map(|_| rng.index(4)).collect(),
            old_log_probs: (0..n).map(|_| rng.uniform_range(-2.0, -1.0)).collect(),
            returns: (0..n).map(|_| rng.uniform_range(-3.0, 3.0)).collect(),
            advantages: (0..n).map(|_| rng.uniform_range(-2.0, 2.0)).collect(),
        };
        (net, batch)
    }

    fn total(net: &Mlp, b: &SampleBatch, c: LossCoefficients, o: PolicyObjective) -> f64 {
        loss_and_gradient(net, b, c, o).unwrap().1.total
    }

    fn check_fd(objective: PolicyObjective) {
        let coef = LossCoefficients { value_coef: 0.5, entropy_coef: 0.01 };
        for seed in 0..3 {
            let (net, batch) = setup(seed);
            let (grads, _) = loss_and_gradient(&net, &batch, coef, objective).unwrap();
            let h = 1e-5;
            for k in 0..grads.len() {
                let mut plus = net.clone();
                plus.params_mut()[k] += h;
                let mut minus = net.clone();
                minus.params_mut()[k] -= h;
                let fd = (total(&plus, &batch, coef, objective) - total(&minus, &batch, coef, objective)) / (2.0 * h);
                let scale = fd.abs().max(grads[k].abs()).max(1e-3);
                assert!((fd - grads[k]).abs() / scale < 1e-4, "param {k}: fd {fd} analytic {}", grads[k]);
            }
        }
    }

    #[test]
    fn a2c_gradient_matches_finite_differences() {
        check_fd(PolicyObjective::VanillaPg);
    }

    #[test]
    fn ppo_gradient_matches_finite_differences() {
        check_fd(PolicyObjective::Clipped(0.2));
    }

    #[test]
    fn clip_cases() {
        assert_eq!(ppo_clip_loss(1.5, 1.0, 0.2), 1.2);
        assert_eq!(ppo_clip_loss(0.5, -1.0, 0.2), -0.8);
        assert_eq!(ppo_clip_loss(1.0, -3.0, 0.2), -3.0);
        assert!((ppo_clip_loss(1.1, 2.0, 0.2) - 2.2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn clip_bounds(ratio in 0.0f64..5.0, adv in -10.0f64..10.0, eps in 0.01f64..0.5) {
            let obj = ppo_clip_loss(ratio, adv, eps);
            prop_assert!(obj <= ratio * adv);
            if adv > 0.0 {
                prop_assert!(obj <= (1.0 + eps) * adv + 1e-12);
            }
        }
    }

    #[test]
    fn ratio_identities() {
        assert_eq!(ppo_ratio(-1.3, -1.3), 1.0);
        assert!((ppo_ratio(-1.0 + 2f64.ln(), -1.0) - 2.0).abs() < 1e-15);
        assert!(ppo_ratio(-700.0, 0.0) > 0.0);
    }

    #[test]
    fn fully_clipped_samples_contribute_no_policy_gradient() {
        let (net, mut batch) = setup(7);
        let coef = LossCoefficients { value_coef: 0.0, entropy_coef: 0.0 };
        // Old log-probs far below the current ones: ratio ≫ 1 + ε, positive advantage.
        for (i, a) in batch.advantages.iter_mut().enumerate() {
            *a = 1.0 + i as f64;
        }
        for l in &mut batch.old_log_probs {
            *l = -50.0;
        }
        let (g, r) = loss_and_gradient(&net, &batch, coef, PolicyObjective::Clipped(0.2)).unwrap();
        assert_eq!(r.clip_fraction, 1.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_advantages_leave_only_entropy_gradient() {
        let (net, mut batch) = setup(3);
        batch.advantages.iter_mut().for_each(|a| *a = 0.0);
        for i in 0..batch.len() {
            batch.returns[i] = net.forward(&batch.observations[i]).unwrap().1;
        }
        let no_ent = LossCoefficients { value_coef: 0.5, entropy_coef: 0.0 };
        let (g, _) = loss_and_gradient(&net, &batch, no_ent, PolicyObjective::VanillaPg).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
        let with_ent = LossCoefficients { value_coef: 0.5, entropy_coef: 0.01 };
        let (g, _) = loss_and_gradient(&net, &batch, with_ent, PolicyObjective::VanillaPg).unwrap();
        assert!(g.iter().any(|&x| x != 0.0));
    }

    #[test]
    fn descent_on_positive_advantage_raises_probability() {
        let (mut net, batch) = setup(5);
        let one = batch.subset(&[0]);
        let mut one = one;
        one.advantages[0] = 1.0;
        let coef = LossCoefficients { value_coef: 0.0, entropy_coef: 0.0 };
        let before = Categorical::from_logits(&net.forward(&one.observations[0]).unwrap().0).log_prob(one.actions[0]);
        let (g, _) = loss_and_gradient(&net, &one, coef, PolicyObjective::VanillaPg).unwrap();
        for (p, gi) in net.params_mut().iter_mut().zip(&g) {
            *p -= 1e-3 * gi;
        }
        let after = Categorical::from_logits(&net.forward(&one.observations[0]).unwrap().0).log_prob(one.actions[0]);
        assert!(after > before);
    }

    #[test]
    fn normalized_advantages_have_unit_scale() {
        let (_, mut batch) = setup(1);
        batch.normalize_advantages();
        let n = batch.len() as f64;
        let mean = batch.advantages.iter().sum::<f64>() / n;
        let var = batch.advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_batch_is_rejected() {
        let (net, _) = setup(0);
        let coef = LossCoefficients { value_coef: 0.5, entropy_coef: 0.0 };
        assert!(loss_and_gradient(&net, &SampleBatch::default(), coef, PolicyObjective::VanillaPg).is_err());
    }
}
