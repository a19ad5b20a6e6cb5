use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::RngStream;

/// Layer sizes of a shared-trunk actor-critic network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub input: usize,
    /// Widths of the tanh trunk layers.
    pub hidden: Vec<usize>,
    pub actions: usize,
}

impl MlpShape {
    /// Two 64-unit tanh layers.
    pub fn actor_critic(input: usize, actions: usize) -> Self {
        Self {
            input,
            hidden: vec![64, 64],
            actions,
        }
    }

    fn layers(&self) -> Vec<Dense> {
        let mut layers = Vec::new();
        let mut offset = 0;
        let mut fan_in = self.input;
        for &h in &self.hidden {
            layers.push(Dense::at(offset, fan_in, h));
            offset += (fan_in + 1) * h;
            fan_in = h;
        }
        layers.push(Dense::at(offset, fan_in, self.actions));
        offset += (fan_in + 1) * self.actions;
        layers.push(Dense::at(offset, fan_in, 1));
        layers
    }

    pub fn parameter_count(&self) -> usize {
        let trunk_out = self.hidden.last().copied().unwrap_or(self.input);
        let mut fan_in = self.input;
        let mut n = 0;
        for &h in &self.hidden {
            n += (fan_in + 1) * h;
            fan_in = h;
        }
        n + (trunk_out + 1) * (self.actions + 1)
    }
}

/// Weight block `[out][in]` (row-major) followed by `out` biases.
#[derive(Debug, Clone, Copy)]
struct Dense {
    w: usize,
    b: usize,
    fan_in: usize,
    fan_out: usize,
}

impl Dense {
    fn at(offset: usize, fan_in: usize, fan_out: usize) -> Self {
        Self {
            w: offset,
            b: offset + fan_in * fan_out,
            fan_in,
            fan_out,
        }
    }

    fn apply(&self, params: &[f64], x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let w = &params[self.w..self.b];
        let b = &params[self.b..self.b + self.fan_out];
        for (row, bias) in w.chunks_exact(self.fan_in).zip(b) {
            out.push(bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        }
    }

    /// Accumulates `dW += dy ⊗ x`, `db += dy`; writes `W^T dy` to `dx` if given.
    fn backward(&self, params: &[f64], x: &[f64], dy: &[f64], grads: &mut [f64], dx: Option<&mut Vec<f64>>) {
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let row = &mut grads[self.w + o * self.fan_in..self.w + (o + 1) * self.fan_in];
            for (r, &xi) in row.iter_mut().zip(x) {
                *r += g * xi;
            }
            grads[self.b + o] += g;
        }
        if let Some(dx) = dx {
            dx.clear();
            dx.resize(self.fan_in, 0.0);
            let w = &params[self.w..self.b];
            for (row, &g) in w.chunks_exact(self.fan_in).zip(dy) {
                if g == 0.0 {
                    continue;
                }
                for (d, &wi) in dx.iter_mut().zip(row) {
                    *d += g * wi;
                }
            }
        }
    }
}

/// Intermediate values of one forward pass, kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub input: Vec<f64>,
    /// Post-tanh output of each trunk layer.
    pub hidden: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub value: f64,
}

/// Actor-critic MLP: a tanh trunk feeding a linear policy head (logits) and a
/// linear value head. Parameters live in one flat vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    shape: MlpShape,
    params: Vec<f64>,
}

impl Mlp {
    pub fn zeros(shape: MlpShape) -> Self {
        let params = vec![0.0; shape.parameter_count()];
        Self { shape, params }
    }

    /// Orthogonal init: trunk gain √2, policy head 0.01, value head 1; zero biases.
    pub fn new(shape: MlpShape, rng: &mut RngStream) -> Self {
        let mut net = Self::zeros(shape);
        let layers = net.shape.layers();
        let n = layers.len();
        for (i, layer) in layers.iter().enumerate() {
            let gain = if i == n - 2 {
                0.01
            } else if i == n - 1 {
                1.0
            } else {
                std::f64::consts::SQRT_2
            };
            let w = orthogonal(layer.fan_out, layer.fan_in, gain, rng);
            net.params[layer.w..layer.b].copy_from_slice(&w);
        }
        net
    }

    pub fn from_parts(shape: MlpShape, params: Vec<f64>) -> Result<Self> {
        if params.len() != shape.parameter_count() {
            return Err(Error::Usage(format!(
                "expected {} parameters, got {}",
                shape.parameter_count(),
                params.len()
            )));
        }
        Ok(Self { shape, params })
    }

    pub fn shape(&self) -> &MlpShape {
        &self.shape
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Zeroes both output heads (weights and biases).
    pub fn zero_heads(&mut self) {
        let layers = self.shape.layers();
        let start = layers[layers.len() - 2].w;
        self.params[start..].iter_mut().for_each(|p| *p = 0.0);
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let a = self.forward_cached(x)?;
        Ok((a.logits, a.value))
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<Activations> {
        if x.len() != self.shape.input {
            return Err(Error::Usage(format!(
                "network expects {} inputs, got {}",
                self.shape.input,
                x.len()
            )));
        }
        let layers = self.shape.layers();
        let (trunk, heads) = layers.split_at(layers.len() - 2);
        let mut hidden: Vec<Vec<f64>> = Vec::with_capacity(trunk.len());
        for layer in trunk {
            let prev = hidden.last().map(Vec::as_slice).unwrap_or(x);
            let mut h = Vec::with_capacity(layer.fan_out);
            layer.apply(&self.params, prev, &mut h);
            h.iter_mut().for_each(|v| *v = v.tanh());
            hidden.push(h);
        }
        let features = hidden.last().map(Vec::as_slice).unwrap_or(x);
        let mut logits = Vec::with_capacity(self.shape.actions);
        heads[0].apply(&self.params, features, &mut logits);
        let mut value = Vec::with_capacity(1);
        heads[1].apply(&self.params, features, &mut value);
        Ok(Activations {
            input: x.to_vec(),
            hidden,
            logits,
            value: value[0],
        })
    }

    /// Accumulates into `grads` the gradient of a scalar loss whose derivatives with
    /// respect to this pass's logits and value are `dlogits` and `dvalue`.
    pub fn accumulate_gradient(&self, act: &Activations, dlogits: &[f64], dvalue: f64, grads: &mut [f64]) -> Result<()> {
        if dlogits.len() != self.shape.actions || grads.len() != self.params.len() {
            return Err(Error::Usage("gradient buffer shape mismatch".into()));
        }
        let layers = self.shape.layers();
        let (trunk, heads) = layers.split_at(layers.len() - 2);
        let features = act.hidden.last().map(Vec::as_slice).unwrap_or(&act.input);

        let mut dh = Vec::new();
        let mut dh_value = Vec::new();
        heads[0].backward(&self.params, features, dlogits, grads, Some(&mut dh));
        heads[1].backward(&self.params, features, &[dvalue], grads, Some(&mut dh_value));
        for (a, b) in dh.iter_mut().zip(&dh_value) {
            *a += b;
        }

        let mut dprev = Vec::new();
        for (i, layer) in trunk.iter().enumerate().rev() {
            let h = &act.hidden[i];
            for (d, &y) in dh.iter_mut().zip(h) {
                *d *= 1.0 - y * y;
            }
            let x = if i == 0 { &act.input } else { &act.hidden[i - 1] };
            layer.backward(&self.params, x, &dh, grads, (i > 0).then_some(&mut dprev));
            std::mem::swap(&mut dh, &mut dprev);
        }
        Ok(())
    }
}

/// `rows × cols` matrix (row-major) with orthonormal rows or columns, scaled.
fn orthogonal(rows: usize, cols: usize, gain: f64, rng: &mut RngStream) -> Vec<f64> {
    let (count, len) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..len)
            .map(|_| StandardNormal.sample(rng.inner_mut()))
            .collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    let mut w = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            w[r * cols + c] = gain * if rows <= cols { basis[r][c] } else { basis[c][r] };
        }
    }
    w
}

/// Records forward passes so a batch loss can be differentiated afterwards.
#[derive(Debug, Default)]
pub struct GradientTape {
    records: Vec<Activations>,
}

/// Derivatives of the loss with respect to one pass's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGradient {
    pub dlogits: Vec<f64>,
    pub dvalue: f64,
}

impl GradientTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forward(&mut self, net: &Mlp, x: &[f64]) -> Result<&Activations> {
        let a = net.forward_cached(x)?;
        self.records.push(a);
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn records(&self) -> &[Activations] {
        &self.records
    }

    /// Parameter gradient of `Σ_i loss_i`, given one output gradient per recorded pass.
    pub fn backward(&self, net: &Mlp, outputs: &[OutputGradient]) -> Result<Vec<f64>> {
        if self.records.is_empty() {
            return Err(Error::Usage("backward without a recorded forward pass".into()));
        }
        if outputs.len() != self.records.len() {
            return Err(Error::Usage(format!(
                "{} output gradients for {} recorded passes",
                outputs.len(),
                self.records.len()
            )));
        }
        let mut grads = vec![0.0; net.params.len()];
        for (act, g) in self.records.iter().zip(outputs) {
            net.accumulate_gradient(act, &g.dlogits, g.dvalue, &mut grads)?;
        }
        Ok(grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_matches_layout() {
        let shape = MlpShape::actor_critic(58, 112);
        let expected = 59 * 64 + 65 * 64 + 65 * 112 + 65;
        assert_eq!(shape.parameter_count(), expected);
        let layers = shape.layers();
        let last = layers.last().unwrap();
        assert_eq!(last.b + last.fan_out, expected);
    }

    #[test]
    fn zero_heads_give_uniform_policy() {
        let mut net = Mlp::new(MlpShape::actor_critic(6, 8), &mut RngStream::new(0, 0));
        net.zero_heads();
        let (logits, value) = net.forward(&[0.3, 0.1, 0.9, 0.0, 1.0, 0.5]).unwrap();
        assert!(logits.iter().all(|&l| l == 0.0));
        assert_eq!(value, 0.0);
    }

    #[test]
    fn forward_deterministic_and_checked() {
        let net = Mlp::new(MlpShape::actor_critic(3, 4), &mut RngStream::new(1, 0));
        let x = [0.2, -0.4, 0.7];
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
        assert!(matches!(net.forward(&[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn orthogonal_rows() {
        let w = orthogonal(4, 7, 1.0, &mut RngStream::new(2, 0));
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = (0..7).map(|k| w[i * 7 + k] * w[j * 7 + k]).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn backward_needs_forward() {
        let net = Mlp::zeros(MlpShape::actor_critic(2, 2));
        let tape = GradientTape::new();
        assert!(matches!(tape.backward(&net, &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn zero_output_gradient_gives_zero_parameter_gradient() {
        let net = Mlp::new(MlpShape { input: 5, hidden: vec![8, 8], actions: 4 }, &mut RngStream::new(3, 0));
        let mut tape = GradientTape::new();
        tape.forward(&net, &[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let g = tape.backward(&net, &[OutputGradient { dlogits: vec![0.0; 4], dvalue: 0.0 }]).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn value_gradient_matches_finite_difference() {
        // d/dθ of (v - R)^2 through the value head, checked against central differences.
        let shape = MlpShape { input: 5, hidden: vec![8, 8], actions: 4 };
        let net = Mlp::new(shape, &mut RngStream::new(4, 0));
        let x = [0.5, -0.2, 0.1, 0.9, -0.7];
        let target = 0.3;
        let mut tape = GradientTape::new();
        let v = tape.forward(&net, &x).unwrap().value;
        let g = tape
            .backward(&net, &[OutputGradient { dlogits: vec![0.0; 4], dvalue: 2.0 * (v - target) }])
            .unwrap();
        let h = 1e-5;
        for i in 0..net.params().len() {
            let mut p = net.clone();
            p.params_mut()[i] += h;
            let up = (p.forward(&x).unwrap().1 - target).powi(2);
            p.params_mut()[i] -= 2.0 * h;
            let down = (p.forward(&x).unwrap().1 - target).powi(2);
            let fd = (up - down) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-4 * fd.abs().max(g[i].abs()).max(1e-5), "param {i}: {fd} vs {}", g[i]);
        }
    }
}
