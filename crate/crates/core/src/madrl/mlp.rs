//! Fully connected network with three hidden layers and batched
//! backpropagation.
//!
//! Activations are stored batch-major: row `b` of a `[batch × width]`
//! buffer holds sample `b`. Weights are row-major `[outputs × inputs]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::numerics::RngStream;
use crate::{Error, Result};

pub const HIDDEN_LAYERS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => libm::tanh(x),
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        DenseLayer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    /// `weights` is row-major `[outputs × inputs]`.
    pub fn from_parts(inputs: usize, outputs: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::invalid("layer dimensions must be positive"));
        }
        if weights.len() != inputs * outputs {
            return Err(Error::LengthMismatch {
                expected: inputs * outputs,
                actual: weights.len(),
            });
        }
        if biases.len() != outputs {
            return Err(Error::LengthMismatch {
                expected: outputs,
                actual: biases.len(),
            });
        }
        Ok(DenseLayer {
            inputs,
            outputs,
            weights,
            biases,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn weight_row(&self, out: usize) -> &[f64] {
        &self.weights[out * self.inputs..(out + 1) * self.inputs]
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Parameters of an `input → h1 → h2 → h3 → output` network. Hidden layers
/// share one activation; the output layer is linear.
///
/// The same shape doubles as a gradient container.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    layers: Vec<DenseLayer>,
    hidden_activation: Activation,
}

/// Scratch buffers for batched evaluation. Reused across calls.
#[derive(Clone, Debug, Default)]
pub struct MlpWorkspace {
    batch: usize,
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl MlpWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Output of the last batched forward pass.
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

impl MlpParams {
    /// All-zero parameters for the given layer widths
    /// (`[input, h1, h2, h3, output]`).
    pub fn zeros(sizes: &[usize], hidden_activation: Activation) -> Result<Self> {
        check_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| DenseLayer::zeros(w[0], w[1]))
            .collect();
        Ok(MlpParams {
            layers,
            hidden_activation,
        })
    }

    /// Weights and biases uniform in `±1/√fan_in`.
    pub fn init_uniform(sizes: &[usize], hidden_activation: Activation, rng: &mut RngStream) -> Result<Self> {
        let mut p = Self::zeros(sizes, hidden_activation)?;
        for layer in &mut p.layers {
            let bound = 1.0 / libm::sqrt(layer.inputs as f64);
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = rng.uniform_range(-bound, bound);
            }
        }
        Ok(p)
    }

    pub fn from_layers(layers: Vec<DenseLayer>, hidden_activation: Activation) -> Result<Self> {
        if layers.len() != HIDDEN_LAYERS + 1 {
            return Err(Error::invalid("network must have exactly three hidden layers"));
        }
        for w in layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return Err(Error::LengthMismatch {
                    expected: w[0].outputs,
                    actual: w[1].inputs,
                });
            }
        }
        let p = MlpParams {
            layers,
            hidden_activation,
        };
        if !p.is_finite() {
            return Err(Error::invalid("network parameters must be finite"));
        }
        Ok(p)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_size()];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    /// Parameters in a fixed order: per layer, weights then biases.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn fill(&mut self, value: f64) {
        self.iter_mut().for_each(|v| *v = value);
    }

    /// Squared Euclidean distance between two parameter sets of equal shape.
    pub fn distance_sqr(&self, other: &MlpParams) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `self ← (1 − τ) self + τ source`.
    pub fn soft_update_from(&mut self, source: &MlpParams, tau: f64) {
        for (t, s) in self.iter_mut().zip(source.iter()) {
            *t = (1.0 - tau) * *t + tau * s;
        }
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut ws = MlpWorkspace::new();
        self.forward_batch(input, 1, &mut ws)?;
        Ok(ws.output().to_vec())
    }

    /// Evaluates `batch` samples stored row-wise in `input`. The output is
    /// left in `ws.output()` and intermediate activations are kept for
    /// [`MlpParams::backward`].
    pub fn forward_batch(&self, input: &[f64], batch: usize, ws: &mut MlpWorkspace) -> Result<()> {
        let n_in = self.input_size();
        if input.len() != n_in * batch {
            return Err(Error::LengthMismatch {
                expected: n_in * batch,
                actual: input.len(),
            });
        }
        ws.batch = batch;
        ws.acts.resize_with(self.layers.len() + 1, Vec::new);
        ws.acts[0].clear();
        ws.acts[0].extend_from_slice(input);

        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let x = &before[l];
            let y = &mut after[0];
            y.clear();
            y.resize(batch * layer.outputs, 0.0);
            for b in 0..batch {
                let xr = &x[b * layer.inputs..(b + 1) * layer.inputs];
                let yr = &mut y[b * layer.outputs..(b + 1) * layer.outputs];
                for (o, out) in yr.iter_mut().enumerate() {
                    *out = layer.biases[o] + dot(layer.weight_row(o), xr);
                }
                if l != last {
                    for v in yr.iter_mut() {
                        *v = self.hidden_activation.apply(*v);
                    }
                }
            }
        }
        Ok(())
    }

    /// Backpropagates `grad_output` (∂L/∂output, batch-major) through the
    /// activations recorded by the last `forward_batch`.
    ///
    /// Parameter gradients are written (not accumulated) into `grads`,
    /// summed over the batch. Input gradients go to `grad_input` when given.
    pub fn backward(
        &self,
        ws: &mut MlpWorkspace,
        grad_output: &[f64],
        mut grads: Option<&mut MlpParams>,
        grad_input: Option<&mut Vec<f64>>,
    ) -> Result<()> {
        let batch = ws.batch;
        if ws.acts.len() != self.layers.len() + 1 {
            return Err(Error::invalid("backward called before forward_batch"));
        }
        if grad_output.len() != batch * self.output_size() {
            return Err(Error::LengthMismatch {
                expected: batch * self.output_size(),
                actual: grad_output.len(),
            });
        }
        if let Some(g) = grads.as_deref_mut() {
            g.fill(0.0);
        }
        let want_input = grad_input.is_some();

        ws.delta.clear();
        ws.delta.extend_from_slice(grad_output);
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let x = &ws.acts[l];
            if let Some(g) = grads.as_deref_mut() {
                let gl = &mut g.layers[l];
                for b in 0..batch {
                    let xr = &x[b * layer.inputs..(b + 1) * layer.inputs];
                    let dr = &ws.delta[b * layer.outputs..(b + 1) * layer.outputs];
                    for (o, &d) in dr.iter().enumerate() {
                        if d != 0.0 {
                            axpy(d, xr, &mut gl.weights[o * layer.inputs..(o + 1) * layer.inputs]);
                            gl.biases[o] += d;
                        }
                    }
                }
            }
            if l == 0 && !want_input {
                break;
            }
            ws.delta_prev.clear();
            ws.delta_prev.resize(batch * layer.inputs, 0.0);
            for b in 0..batch {
                let dr = &ws.delta[b * layer.outputs..(b + 1) * layer.outputs];
                let pr = &mut ws.delta_prev[b * layer.inputs..(b + 1) * layer.inputs];
                for (o, &d) in dr.iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, layer.weight_row(o), pr);
                    }
                }
                if l > 0 {
                    let xr = &x[b * layer.inputs..(b + 1) * layer.inputs];
                    for (p, &y) in pr.iter_mut().zip(xr) {
                        *p *= self.hidden_activation.derivative_from_output(y);
                    }
                }
            }
            core::mem::swap(&mut ws.delta, &mut ws.delta_prev);
        }
        if let Some(gi) = grad_input {
            gi.clear();
            gi.extend_from_slice(&ws.delta);
        }
        Ok(())
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() != HIDDEN_LAYERS + 2 {
        return Err(Error::invalid("network must have exactly three hidden layers"));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::invalid("layer widths must be positive"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(act: Activation, seed: u64) -> MlpParams {
        MlpParams::init_uniform(&[5, 7, 6, 4, 3], act, &mut RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = MlpParams::zeros(&[4, 8, 8, 8, 2], Activation::Relu).unwrap();
        assert_eq!(p.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_wrong_depth() {
        assert!(MlpParams::zeros(&[4, 8, 2], Activation::Relu).is_err());
        let layers = vec![DenseLayer::zeros(2, 2), DenseLayer::zeros(2, 1)];
        assert!(MlpParams::from_layers(layers, Activation::Relu).is_err());
    }

    #[test]
    fn batch_matches_single_sample() {
        let p = net(Activation::Relu, 3);
        let mut rng = RngStream::new(4, 0);
        let input: Vec<f64> = (0..5 * 6).map(|_| rng.standard_normal()).collect();
        let mut ws = MlpWorkspace::new();
        p.forward_batch(&input, 6, &mut ws).unwrap();
        for b in 0..6 {
            let single = p.forward(&input[b * 5..(b + 1) * 5]).unwrap();
            assert_eq!(&ws.output()[b * 3..(b + 1) * 3], single.as_slice());
        }
    }

    fn loss(p: &MlpParams, input: &[f64], weights: &[f64]) -> f64 {
        p.forward(input)
            .unwrap()
            .iter()
            .zip(weights)
            .map(|(y, w)| y * w)
            .sum()
    }

    #[test]
    fn gradients_match_finite_differences() {
        for act in [Activation::Tanh, Activation::Relu] {
            let p = net(act, 17);
            let input = [0.3, -1.2, 0.8, 0.05, -0.4];
            let upstream = [0.7, -1.1, 0.25];
            let mut ws = MlpWorkspace::new();
            p.forward_batch(&input, 1, &mut ws).unwrap();
            let mut grads = p.clone();
            let mut gin = Vec::new();
            p.backward(&mut ws, &upstream, Some(&mut grads), Some(&mut gin)).unwrap();

            let h = 1e-5;
            let analytic: Vec<f64> = grads.iter().copied().collect();
            for (k, a) in analytic.iter().enumerate() {
                let mut plus = p.clone();
                *plus.iter_mut().nth(k).unwrap() += h;
                let mut minus = p.clone();
                *minus.iter_mut().nth(k).unwrap() -= h;
                let fd = (loss(&plus, &input, &upstream) - loss(&minus, &input, &upstream)) / (2.0 * h);
                assert!((fd - a).abs() <= 1e-6 + 1e-4 * fd.abs(), "param {k}: fd {fd} vs {a}");
            }
            for i in 0..input.len() {
                let mut xp = input;
                xp[i] += h;
                let mut xm = input;
                xm[i] -= h;
                let fd = (loss(&p, &xp, &upstream) - loss(&p, &xm, &upstream)) / (2.0 * h);
                assert!((fd - gin[i]).abs() <= 1e-6 + 1e-4 * fd.abs());
            }
        }
    }

    #[test]
    fn batch_gradients_are_sums() {
        let p = net(Activation::Tanh, 5);
        let input = [0.1, 0.2, 0.3, 0.4, 0.5, -0.5, -0.4, -0.3, -0.2, -0.1];
        let up = [1.0, 0.5, -0.5, 0.2, 0.3, 0.4];
        let mut ws = MlpWorkspace::new();
        p.forward_batch(&input, 2, &mut ws).unwrap();
        let mut both = p.clone();
        p.backward(&mut ws, &up, Some(&mut both), None).unwrap();

        let mut sum = p.clone();
        sum.fill(0.0);
        for b in 0..2 {
            p.forward_batch(&input[b * 5..(b + 1) * 5], 1, &mut ws).unwrap();
            let mut g = p.clone();
            p.backward(&mut ws, &up[b * 3..(b + 1) * 3], Some(&mut g), None).unwrap();
            for (s, v) in sum.iter_mut().zip(g.iter()) {
                *s += v;
            }
        }
        assert!(both.distance_sqr(&sum) < 1e-24);
    }

    #[test]
    fn soft_update_interpolates() {
        let a = net(Activation::Relu, 1);
        let mut t = MlpParams::zeros(&a.sizes(), Activation::Relu).unwrap();
        t.soft_update_from(&a, 1.0);
        assert_eq!(t, a);
        let mut half = MlpParams::zeros(&a.sizes(), Activation::Relu).unwrap();
        half.soft_update_from(&a, 0.5);
        for (h, v) in half.iter().zip(a.iter()) {
            assert!((h - 0.5 * v).abs() < 1e-15);
        }
    }
}
