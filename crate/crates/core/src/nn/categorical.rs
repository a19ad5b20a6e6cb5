use crate::sim::RngStream;

/// Softmax distribution over discrete actions, stored as log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    log_probs: Vec<f64>,
}

impl Categorical {
    /// Log-softmax with max subtraction.
    pub fn from_logits(logits: &[f64]) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
        Self {
            log_probs: logits.iter().map(|&l| l - lse).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }

    pub fn log_prob(&self, action: usize) -> f64 {
        self.log_probs[action]
    }

    pub fn entropy(&self) -> f64 {
        -self
            .log_probs
            .iter()
            .map(|&l| if l == f64::NEG_INFINITY { 0.0 } else { l.exp() * l })
            .sum::<f64>()
    }

    /// `(log π(a), H(π))`.
    pub fn log_prob_entropy(&self, action: usize) -> (f64, f64) {
        (self.log_prob(action), self.entropy())
    }

    /// Inverse-CDF sample.
    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (i, l) in self.log_probs.iter().enumerate() {
            acc += l.exp();
            if u < acc {
                return i;
            }
        }
        // Rounding left `acc` a hair under 1.
        self.log_probs
            .iter()
            .rposition(|&l| l > f64::NEG_INFINITY)
            .unwrap_or(0)
    }

    /// Most likely action, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &l) in self.log_probs.iter().enumerate() {
            if l > self.log_probs[best] {
                best = i;
            }
        }
        best
    }

    /// `∂ log π(a) / ∂ logits = onehot(a) - p`.
    pub fn log_prob_grad(&self, action: usize) -> Vec<f64> {
        self.log_probs
            .iter()
            .enumerate()
            .map(|(k, l)| f64::from(u8::from(k == action)) - l.exp())
            .collect()
    }

    /// `∂H / ∂logit_k = -p_k (log p_k + H)`.
    pub fn entropy_grad(&self) -> Vec<f64> {
        let h = self.entropy();
        self.log_probs
            .iter()
            .map(|&l| {
                let p = l.exp();
                if p == 0.0 {
                    0.0
                } else {
                    -p * (l + h)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_over_112() {
        let d = Categorical::from_logits(&[0.0; 112]);
        let (lp, h) = d.log_prob_entropy(17);
        assert!((lp + (112f64).ln()).abs() < 1e-12);
        assert!((h - (112f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn peaked_entropy_vanishes() {
        let mut logits = vec![0.0; 10];
        logits[3] = 1000.0;
        let d = Categorical::from_logits(&logits);
        assert!(d.entropy() < 1e-12);
        assert_eq!(d.argmax(), 3);
        assert_eq!(d.sample(&mut RngStream::new(0, 0)), 3);
    }

    #[test]
    fn sampling_frequencies() {
        let d = Categorical::from_logits(&[0.0, (3f64).ln()]);
        let mut rng = RngStream::new(5, 0);
        let ones = (0..40_000).filter(|_| d.sample(&mut rng) == 1).count();
        assert!((ones as f64 / 40_000.0 - 0.75).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn normalized(logits in prop::collection::vec(-50.0f64..50.0, 1..40)) {
            let d = Categorical::from_logits(&logits);
            let total: f64 = d.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(d.probs().iter().all(|&p| p >= 0.0));
            prop_assert!(d.log_probs().iter().all(|&l| l <= 0.0));
            let h = d.entropy();
            prop_assert!(h >= -1e-12 && h <= (logits.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn shift_invariant(logits in prop::collection::vec(-50.0f64..50.0, 1..40), c in -100.0f64..100.0) {
            let a = Categorical::from_logits(&logits);
            let shifted: Vec<f64> = logits.iter().map(|l| l + c).collect();
            let b = Categorical::from_logits(&shifted);
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
