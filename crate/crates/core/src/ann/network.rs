//! Fully connected feedforward network with per-parameter freeze flags.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Width of each hidden layer in a freshly initialized network.
pub const INITIAL_HIDDEN_WIDTH: usize = 5;
/// Number of hidden layers in a freshly initialized network.
pub const INITIAL_HIDDEN_LAYERS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Xavier/Glorot uniform half-range.
pub fn xavier_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// One affine map `y = W x + b`; `weights` is row-major `n_out × n_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub frozen_weights: Vec<bool>,
    pub frozen_biases: Vec<bool>,
}

impl Layer {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            biases: vec![0.0; n_out],
            frozen_weights: vec![false; n_in * n_out],
            frozen_biases: vec![false; n_out],
        }
    }

    /// Xavier-uniform weights and zero biases.
    pub fn xavier(n_in: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut l = Self::zeros(n_in, n_out);
        let lim = xavier_limit(n_in, n_out);
        l.weights.iter_mut().for_each(|w| *w = rng.random_range(-lim..=lim));
        l
    }

    #[inline]
    pub fn w(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.n_in + col]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Growable dense network. Hidden layers share one activation; the output
/// layer has its own (identity by default).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    pub(crate) layers: Vec<Layer>,
    pub(crate) hidden_activation: Activation,
    pub(crate) output_activation: Activation,
    pub(crate) seed: u64,
}

/// Pre- and post-activation values of every layer from one forward pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForwardCache {
    pub input: Vec<f64>,
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

/// Gradient of the loss with respect to each layer's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// `[d_in, 5, 5, d_out]` network, Xavier-uniform weights, zero biases.
pub fn init_network(d_in: usize, d_out: usize, seed: u64) -> DenseNetwork {
    DenseNetwork::with_dims(&[d_in, INITIAL_HIDDEN_WIDTH, INITIAL_HIDDEN_WIDTH, d_out], seed).expect("initial layer dims are valid")
}

impl DenseNetwork {
    /// Network with arbitrary `layer_dims` (input, hidden..., output).
    pub fn with_dims(layer_dims: &[usize], seed: u64) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::Argument(format!("invalid layer dims {layer_dims:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_dims.windows(2).map(|w| Layer::xavier(w[0], w[1], &mut rng)).collect();
        Ok(Self { layers, hidden_activation: Activation::Tanh, output_activation: Activation::Identity, seed })
    }

    /// Assembles a network from explicit layers; shapes must chain.
    pub fn from_layers(layers: Vec<Layer>, hidden_activation: Activation, output_activation: Activation, seed: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Argument("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.n_in * l.n_out
                || l.biases.len() != l.n_out
                || l.frozen_weights.len() != l.weights.len()
                || l.frozen_biases.len() != l.biases.len()
            {
                return Err(Error::Argument(format!("layer {i} has inconsistent shapes")));
            }
            if i > 0 && layers[i - 1].n_out != l.n_in {
                return Err(Error::Argument(format!("layer {i} input {} does not match previous output {}", l.n_in, layers[i - 1].n_out)));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::Argument(format!("layer {i} has non-finite parameters")));
            }
        }
        Ok(Self { layers, hidden_activation, output_activation, seed })
    }

    pub fn set_output_activation(&mut self, a: Activation) {
        self.output_activation = a;
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn d_in(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn d_out(&self) -> usize {
        self.layers.last().map(|l| l.n_out).unwrap_or(0)
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut d = vec![self.d_in()];
        d.extend(self.layers.iter().map(|l| l.n_out));
        d
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.n_out).collect()
    }

    /// Dims joined with dashes, e.g. `9-5-5-3`.
    pub fn architecture(&self) -> String {
        self.layer_dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join("-")
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    pub fn any_frozen(&self) -> bool {
        self.layers.iter().any(|l| l.frozen_weights.iter().chain(&l.frozen_biases).any(|&f| f))
    }

    pub fn freeze_all(&mut self) {
        for l in &mut self.layers {
            l.frozen_weights.iter_mut().for_each(|f| *f = true);
            l.frozen_biases.iter_mut().for_each(|f| *f = true);
        }
    }

    pub fn clear_frozen(&mut self) {
        for l in &mut self.layers {
            l.frozen_weights.iter_mut().for_each(|f| *f = false);
            l.frozen_biases.iter_mut().for_each(|f| *f = false);
        }
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    /// Forward pass keeping every intermediate value.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if x.len() != self.d_in() {
            return Err(Error::Argument(format!("input has {} features, network expects {}", x.len(), self.d_in())));
        }
        let mut cache =
            ForwardCache { input: x.to_vec(), pre: Vec::with_capacity(self.layers.len()), post: Vec::with_capacity(self.layers.len()) };
        for (k, l) in self.layers.iter().enumerate() {
            let act = self.activation_of(k);
            let input = if k == 0 { &cache.input } else { &cache.post[k - 1] };
            let z: Vec<f64> = (0..l.n_out)
                .map(|i| {
                    let row = &l.weights[i * l.n_in..(i + 1) * l.n_in];
                    l.biases[i] + row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>()
                })
                .collect();
            let a: Vec<f64> = z.iter().map(|&v| act.apply(v)).collect();
            cache.pre.push(z);
            cache.post.push(a);
        }
        Ok((cache.post.last().cloned().unwrap_or_default(), cache))
    }

    /// Output only, using `scratch` to avoid allocation.
    pub fn predict_into(&self, x: &[f64], scratch: &mut Scratch, out: &mut Vec<f64>) {
        scratch.ensure(self);
        for (k, l) in self.layers.iter().enumerate() {
            let act = self.activation_of(k);
            let (before, after) = scratch.post.split_at_mut(k);
            let input: &[f64] = if k == 0 { x } else { &before[k - 1] };
            let dst = &mut after[0];
            for i in 0..l.n_out {
                let row = &l.weights[i * l.n_in..(i + 1) * l.n_in];
                dst[i] = act.apply(l.biases[i] + row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>());
            }
        }
        out.clear();
        out.extend_from_slice(scratch.post.last().unwrap());
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.0)
    }

    /// Exact gradients of `½‖target − forward(x)‖²`.
    pub fn backprop(&self, x: &[f64], target: &[f64]) -> Result<Gradients> {
        if target.len() != self.d_out() {
            return Err(Error::Argument(format!("target has {} values, network produces {}", target.len(), self.d_out())));
        }
        let (y, cache) = self.forward(x)?;
        let n = self.layers.len();
        let out_act = self.output_activation;
        let mut delta: Vec<f64> = y.iter().zip(target).map(|(yi, ti)| (yi - ti) * out_act.derivative_from_output(*yi)).collect();
        let mut gw = vec![Vec::new(); n];
        let mut gb = vec![Vec::new(); n];
        for k in (0..n).rev() {
            let l = &self.layers[k];
            let input = if k == 0 { &cache.input } else { &cache.post[k - 1] };
            let mut w = vec![0.0; l.weights.len()];
            for i in 0..l.n_out {
                for j in 0..l.n_in {
                    w[i * l.n_in + j] = delta[i] * input[j];
                }
            }
            gw[k] = w;
            gb[k] = delta.clone();
            if k > 0 {
                let prev = &cache.post[k - 1];
                delta = (0..l.n_in)
                    .map(|j| {
                        let s: f64 = (0..l.n_out).map(|i| l.weights[i * l.n_in + j] * delta[i]).sum();
                        s * self.hidden_activation.derivative_from_output(prev[j])
                    })
                    .collect();
            }
        }
        Ok(Gradients { weights: gw, biases: gb })
    }

    /// `p ← p − lr·g`, skipping frozen parameters when `respect_frozen`.
    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64, respect_frozen: bool) -> Result<()> {
        if grads.weights.len() != self.layers.len() {
            return Err(Error::Argument("gradient layer count does not match network".into()));
        }
        for (k, l) in self.layers.iter_mut().enumerate() {
            if grads.weights[k].len() != l.weights.len() || grads.biases[k].len() != l.biases.len() {
                return Err(Error::Argument(format!("gradient shape mismatch in layer {k}")));
            }
            for (idx, (p, g)) in l.weights.iter_mut().zip(&grads.weights[k]).enumerate() {
                if !(respect_frozen && l.frozen_weights[idx]) {
                    *p -= lr * g;
                }
            }
            for (idx, (p, g)) in l.biases.iter_mut().zip(&grads.biases[k]).enumerate() {
                if !(respect_frozen && l.frozen_biases[idx]) {
                    *p -= lr * g;
                }
            }
        }
        Ok(())
    }

    /// Fused forward, backward and update for one sample. Returns the
    /// pre-update output in `scratch.output()`. Equivalent to
    /// `backprop` followed by `sgd_step`, without allocating.
    pub fn train_sample(&mut self, x: &[f64], target: &[f64], lr: f64, respect_frozen: bool, scratch: &mut Scratch) {
        scratch.ensure(self);
        let n = self.layers.len();
        for k in 0..n {
            let act = self.activation_of(k);
            let l = &self.layers[k];
            let (before, after) = scratch.post.split_at_mut(k);
            let input: &[f64] = if k == 0 { x } else { &before[k - 1] };
            let dst = &mut after[0];
            for i in 0..l.n_out {
                let row = &l.weights[i * l.n_in..(i + 1) * l.n_in];
                dst[i] = act.apply(l.biases[i] + row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>());
            }
        }
        let out_act = self.output_activation;
        {
            let y = &scratch.post[n - 1];
            let d = &mut scratch.delta[n - 1];
            for i in 0..y.len() {
                d[i] = (y[i] - target[i]) * out_act.derivative_from_output(y[i]);
            }
        }
        // Propagate deltas with the pre-update weights.
        for k in (1..n).rev() {
            let l = &self.layers[k];
            let (lower, upper) = scratch.delta.split_at_mut(k);
            let d_up = &upper[0];
            let d_low = &mut lower[k - 1];
            let prev = &scratch.post[k - 1];
            for j in 0..l.n_in {
                let mut s = 0.0;
                for i in 0..l.n_out {
                    s += l.weights[i * l.n_in + j] * d_up[i];
                }
                d_low[j] = s * self.hidden_activation.derivative_from_output(prev[j]);
            }
        }
        for k in 0..n {
            let input: &[f64] = if k == 0 { x } else { &scratch.post[k - 1] };
            let d = &scratch.delta[k];
            let l = &mut self.layers[k];
            let n_in = l.n_in;
            if respect_frozen {
                for i in 0..l.n_out {
                    let step = lr * d[i];
                    for j in 0..n_in {
                        let idx = i * n_in + j;
                        if !l.frozen_weights[idx] {
                            l.weights[idx] -= step * input[j];
                        }
                    }
                    if !l.frozen_biases[i] {
                        l.biases[i] -= step;
                    }
                }
            } else {
                for i in 0..l.n_out {
                    let step = lr * d[i];
                    let row = &mut l.weights[i * n_in..(i + 1) * n_in];
                    for (w, v) in row.iter_mut().zip(input) {
                        *w -= step * v;
                    }
                    l.biases[i] -= step;
                }
            }
        }
    }
}

fn param_mut(net: &mut DenseNetwork, layer: usize, is_bias: bool, idx: usize) -> &mut f64 {
    let l = &mut net.layers[layer];
    if is_bias {
        &mut l.biases[idx]
    } else {
        &mut l.weights[idx]
    }
}

/// Worst disagreement between backprop and central differences of
/// `½‖target − y‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    pub params: usize,
}

/// Compares every analytic gradient with a central difference of step `h`.
/// The relative error of one parameter is `|g − fd| / max(|g|, |fd|, floor)`.
pub fn gradient_check(net: &DenseNetwork, x: &[f64], target: &[f64], h: f64, floor: f64) -> Result<GradientCheck> {
    let grads = net.backprop(x, target)?;
    let loss = |n: &DenseNetwork| -> Result<f64> {
        let y = n.predict(x)?;
        Ok(0.5 * y.iter().zip(target).map(|(a, b)| (b - a) * (b - a)).sum::<f64>())
    };
    let mut probe = net.clone();
    let mut out = GradientCheck { max_relative_error: 0.0, max_absolute_error: 0.0, params: 0 };
    for k in 0..net.layers.len() {
        for (is_bias, analytic) in [(false, &grads.weights[k]), (true, &grads.biases[k])] {
            for (idx, &g) in analytic.iter().enumerate() {
                let orig = *param_mut(&mut probe, k, is_bias, idx);
                *param_mut(&mut probe, k, is_bias, idx) = orig + h;
                let up = loss(&probe)?;
                *param_mut(&mut probe, k, is_bias, idx) = orig - h;
                let down = loss(&probe)?;
                *param_mut(&mut probe, k, is_bias, idx) = orig;
                let fd = (up - down) / (2.0 * h);
                let abs = (g - fd).abs();
                out.max_absolute_error = out.max_absolute_error.max(abs);
                out.max_relative_error = out.max_relative_error.max(abs / g.abs().max(fd.abs()).max(floor));
                out.params += 1;
            }
        }
    }
    Ok(out)
}

/// Reusable buffers for allocation-free passes.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    post: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl Scratch {
    fn ensure(&mut self, net: &DenseNetwork) {
        let fits = self.post.len() == net.layers.len() && self.post.iter().zip(&net.layers).all(|(p, l)| p.len() == l.n_out);
        if !fits {
            self.post = net.layers.iter().map(|l| vec![0.0; l.n_out]).collect();
            self.delta = self.post.clone();
        }
    }

    /// Network output from the last pass.
    pub fn output(&self) -> &[f64] {
        self.post.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn initial_shapes() {
        let net = init_network(9, 3, 1);
        assert_eq!(net.layer_dims(), vec![9, 5, 5, 3]);
        let shapes: Vec<_> = net.layers().iter().map(|l| (l.n_out, l.n_in)).collect();
        assert_eq!(shapes, vec![(5, 9), (5, 5), (3, 5)]);
        let rocking = init_network(5, 1, 1);
        let shapes: Vec<_> = rocking.layers().iter().map(|l| (l.n_out, l.n_in)).collect();
        assert_eq!(shapes, vec![(5, 5), (5, 5), (1, 5)]);
        assert!(net.layers().iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
        assert!(!net.any_frozen());
        for l in net.layers() {
            let lim = xavier_limit(l.n_in, l.n_out);
            assert!(l.weights.iter().all(|w| w.abs() <= lim));
        }
    }

    #[test]
    fn init_is_deterministic() {
        assert_eq!(init_network(9, 3, 42), init_network(9, 3, 42));
        assert_ne!(init_network(9, 3, 42), init_network(9, 3, 43));
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut net = init_network(4, 2, 0);
        for l in net.layers_mut() {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        assert_eq!(net.predict(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_hand_computation() {
        let mut a = Layer::zeros(1, 1);
        a.weights[0] = 1.0;
        let b = a.clone();
        let net = DenseNetwork::from_layers(vec![a, b], Activation::Tanh, Activation::Identity, 0).unwrap();
        let y = net.predict(&[0.5]).unwrap()[0];
        assert!((y - 0.46212).abs() < 1e-5);
        assert_eq!(y, 0.5_f64.tanh());
    }

    #[test]
    fn hidden_activations_bounded() {
        let net = init_network(3, 2, 5);
        let (_, cache) = net.forward(&[100.0, -50.0, 7.0]).unwrap();
        for h in &cache.post[..cache.post.len() - 1] {
            assert!(h.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let net = init_network(3, 2, 5);
        assert!(matches!(net.forward(&[1.0]), Err(Error::Argument(_))));
        assert!(matches!(net.backprop(&[1.0, 2.0, 3.0], &[1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_residual_zero_gradient() {
        let net = init_network(3, 2, 5);
        let x = [0.3, -0.1, 0.8];
        let y = net.predict(&x).unwrap();
        let g = net.backprop(&x, &y).unwrap();
        assert!(g.weights.iter().chain(&g.biases).flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_scalar_gradient() {
        // d/dw ½(t − wx)² = −(t − wx)x; w=2, x=3, t=1 → 15.
        let mut l = Layer::zeros(1, 1);
        l.weights[0] = 2.0;
        let net = DenseNetwork::from_layers(vec![l], Activation::Tanh, Activation::Identity, 0).unwrap();
        let g = net.backprop(&[3.0], &[1.0]).unwrap();
        assert_eq!(g.weights[0][0], 15.0);
        assert_eq!(g.biases[0][0], 5.0);
    }

    #[test]
    fn sgd_step_semantics() {
        let mut l = Layer::zeros(1, 1);
        l.weights[0] = 1.0;
        let mut net = DenseNetwork::from_layers(vec![l], Activation::Tanh, Activation::Identity, 0).unwrap();
        let g = Gradients { weights: vec![vec![0.5]], biases: vec![vec![0.0]] };
        let before = net.clone();
        net.sgd_step(&g, 0.0, false).unwrap();
        assert_eq!(net, before);
        net.freeze_all();
        net.sgd_step(&g, 0.5, true).unwrap();
        assert_eq!(net.layers()[0].weights, before.layers()[0].weights);
        net.sgd_step(&g, 0.5, false).unwrap();
        assert_eq!(net.layers()[0].weights[0], 0.75);
    }

    #[test]
    fn fused_update_matches_two_step_path() {
        let mut a = init_network(4, 2, 17);
        let mut b = a.clone();
        let x = [0.2, -0.7, 0.4, 1.1];
        let t = [0.3, -0.2];
        let g = a.backprop(&x, &t).unwrap();
        a.sgd_step(&g, 0.1, false).unwrap();
        let mut s = Scratch::default();
        b.train_sample(&x, &t, 0.1, false, &mut s);
        for (la, lb) in a.layers().iter().zip(b.layers()) {
            for (p, q) in la.weights.iter().chain(&la.biases).zip(lb.weights.iter().chain(&lb.biases)) {
                assert!((p - q).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn predict_into_matches_forward() {
        let net = init_network(4, 3, 8);
        let x = [0.5, 0.1, -0.3, 0.9];
        let mut s = Scratch::default();
        let mut out = Vec::new();
        net.predict_into(&x, &mut s, &mut out);
        assert_eq!(out, net.predict(&x).unwrap());
    }

    proptest! {
        // With zero biases and a linear output, tanh oddness makes the
        // whole network odd.
        #[test]
        fn odd_symmetry(seed in 0u64..1000, xs in proptest::collection::vec(-2.0f64..2.0, 6)) {
            let net = DenseNetwork::with_dims(&[6, 7, 4, 3], seed).unwrap();
            let neg: Vec<f64> = xs.iter().map(|v| -v).collect();
            let a = net.predict(&xs).unwrap();
            let b = net.predict(&neg).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!(*p, -*q);
            }
        }
    }
}
