use serde::{Deserialize, Serialize};

/// Optimizer with its per-parameter state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Optimizer {
    Adam {
        beta1: f64,
        beta2: f64,
        eps: f64,
        m: Vec<f64>,
        v: Vec<f64>,
        t: u64,
    },
    /// `ms ← ρ·ms + (1-ρ)·g²`, `p ← p - lr·g / sqrt(ms + ε)`.
    RmsProp { decay: f64, eps: f64, ms: Vec<f64> },
}

impl Optimizer {
    pub fn adam(n: usize) -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn rmsprop(n: usize) -> Self {
        Optimizer::RmsProp {
            decay: 0.99,
            eps: 1e-5,
            ms: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Optimizer::Adam { m, .. } => m.len(),
            Optimizer::RmsProp { ms, .. } => ms.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One descent step on `params` along `grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        assert_eq!(params.len(), grads.len(), "parameter/gradient length mismatch");
        assert_eq!(params.len(), self.len(), "optimizer state length mismatch");
        match self {
            Optimizer::Adam { beta1, beta2, eps, m, v, t } => {
                *t += 1;
                let c1 = 1.0 - beta1.powi(*t as i32);
                let c2 = 1.0 - beta2.powi(*t as i32);
                for i in 0..params.len() {
                    let g = grads[i];
                    m[i] = *beta1 * m[i] + (1.0 - *beta1) * g;
                    v[i] = *beta2 * v[i] + (1.0 - *beta2) * g * g;
                    let mhat = m[i] / c1;
                    let vhat = v[i] / c2;
                    params[i] -= lr * mhat / (vhat.sqrt() + *eps);
                }
            }
            Optimizer::RmsProp { decay, eps, ms } => {
                for i in 0..params.len() {
                    let g = grads[i];
                    ms[i] = *decay * ms[i] + (1.0 - *decay) * g * g;
                    params[i] -= lr * g / (ms[i] + *eps).sqrt();
                }
            }
        }
    }
}

/// Rescales `grads` in place so its L2 norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= s);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_fixed_point() {
        for mut opt in [Optimizer::adam(3), Optimizer::rmsprop(3)] {
            let mut p = vec![1.0, -2.0, 0.5];
            opt.step(&mut p, &[0.0; 3], 0.01);
            assert_eq!(p, [1.0, -2.0, 0.5]);
        }
    }

    #[test]
    fn zero_learning_rate() {
        for mut opt in [Optimizer::adam(2), Optimizer::rmsprop(2)] {
            let mut p = vec![1.0, 2.0];
            opt.step(&mut p, &[0.3, -4.0], 0.0);
            assert_eq!(p, [1.0, 2.0]);
        }
    }

    #[test]
    fn first_adam_step() {
        // m̂ = g = 1 and v̂ = g² = 1, so the step is lr / (1 + ε).
        let mut opt = Optimizer::adam(1);
        let mut p = vec![0.5];
        opt.step(&mut p, &[1.0], 0.001);
        assert!((0.5 - p[0] - 0.001 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn first_rmsprop_step() {
        let mut opt = Optimizer::rmsprop(1);
        let mut p = vec![0.0];
        opt.step(&mut p, &[2.0], 0.1);
        let expected = -0.1 * 2.0 / (0.01f64 * 4.0 + 1e-5).sqrt();
        assert!((p[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn clipping() {
        let mut g = vec![3.0, 4.0];
        assert_eq!(clip_grad_norm(&mut g, 1.0), 5.0);
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        let mut small = vec![0.1];
        clip_grad_norm(&mut small, 1.0);
        assert_eq!(small, [0.1]);
    }
}
