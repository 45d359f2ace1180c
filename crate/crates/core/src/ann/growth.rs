//! Architecture growth: one extra node per hidden layer, or one extra layer.

use super::network::{xavier_limit, DenseNetwork, Layer};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scale of freshly added parameters relative to the Xavier half-range.
pub const NEW_PARAM_SCALE: f64 = 0.1;
/// Noise scale of a near-identity layer relative to the Xavier half-range.
pub const IDENTITY_NOISE_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidenMode {
    /// New outgoing weights are small random values.
    Random,
    /// New outgoing weights are zero, so the output is unchanged.
    FunctionPreserving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeepenMode {
    /// New layer drawn at full Xavier scale, zero bias.
    Random,
    /// Identity plus small noise, zero bias.
    NearIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthKind {
    Widen,
    Deepen,
}

impl GrowthKind {
    pub fn letter(self) -> char {
        match self {
            GrowthKind::Widen => 'W',
            GrowthKind::Deepen => 'D',
        }
    }
}

/// Adds one node to every hidden layer. Existing parameters keep their values
/// and become frozen; new ones are trainable.
pub fn widen(net: &DenseNetwork, mode: WidenMode, seed: u64) -> Result<DenseNetwork> {
    let n = net.layers.len();
    if n < 2 {
        return Err(Error::Argument("widen needs at least one hidden layer".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(n);
    for (k, old) in net.layers.iter().enumerate() {
        let grow_in = k > 0;
        let grow_out = k + 1 < n;
        let n_in = old.n_in + grow_in as usize;
        let n_out = old.n_out + grow_out as usize;
        let scale = NEW_PARAM_SCALE * xavier_limit(n_in, n_out);
        let mut l = Layer::zeros(n_in, n_out);
        for i in 0..n_out {
            for j in 0..n_in {
                let idx = i * n_in + j;
                if i < old.n_out && j < old.n_in {
                    l.weights[idx] = old.w(i, j);
                    l.frozen_weights[idx] = true;
                } else if i < old.n_out {
                    // Outgoing weight from the previous layer's new node.
                    l.weights[idx] = match mode {
                        WidenMode::Random => rng.random_range(-scale..=scale),
                        WidenMode::FunctionPreserving => 0.0,
                    };
                } else {
                    l.weights[idx] = rng.random_range(-scale..=scale);
                }
            }
            if i < old.n_out {
                l.biases[i] = old.biases[i];
                l.frozen_biases[i] = true;
            } else {
                l.biases[i] = rng.random_range(-scale..=scale);
            }
        }
        layers.push(l);
    }
    DenseNetwork::from_layers(layers, net.hidden_activation, net.output_activation, net.seed)
}

/// Inserts a hidden layer, as wide as the last hidden layer, right before
/// the output layer. Existing parameters become frozen.
pub fn deepen(net: &DenseNetwork, mode: DeepenMode, seed: u64) -> Result<DenseNetwork> {
    let n = net.layers.len();
    let width = net.layers[n - 1].n_in;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lim = xavier_limit(width, width);
    let mut fresh = Layer::zeros(width, width);
    for i in 0..width {
        for j in 0..width {
            let idx = i * width + j;
            fresh.weights[idx] = match mode {
                DeepenMode::Random => rng.random_range(-lim..=lim),
                DeepenMode::NearIdentity => {
                    let noise = IDENTITY_NOISE_SCALE * lim;
                    (i == j) as u8 as f64 + rng.random_range(-noise..=noise)
                }
            };
        }
    }
    let mut layers: Vec<Layer> = net.layers.clone();
    for l in &mut layers {
        l.frozen_weights.iter_mut().for_each(|f| *f = true);
        l.frozen_biases.iter_mut().for_each(|f| *f = true);
    }
    layers.insert(n - 1, fresh);
    DenseNetwork::from_layers(layers, net.hidden_activation, net.output_activation, net.seed)
}

/// Kind of the `event`-th growth (1-based): every `widens_per_deepen`-th is a deepen.
pub fn growth_kind(event: usize, widens_per_deepen: usize) -> GrowthKind {
    if widens_per_deepen > 0 && event > 0 && event.is_multiple_of(widens_per_deepen) {
        GrowthKind::Deepen
    } else {
        GrowthKind::Widen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::network::init_network;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn widen_adds_one_node_per_hidden_layer() {
        let net = init_network(9, 3, 1);
        let w = widen(&net, WidenMode::Random, 7).unwrap();
        assert_eq!(w.layer_dims(), vec![9, 6, 6, 3]);
        assert!(w.param_count() > net.param_count());
        for (k, (a, b)) in net.layers().iter().zip(w.layers()).enumerate() {
            for i in 0..a.n_out {
                for j in 0..a.n_in {
                    assert_eq!(a.w(i, j), b.w(i, j), "layer {k}");
                    assert!(b.frozen_weights[i * b.n_in + j]);
                }
                assert!(b.frozen_biases[i]);
            }
            let frozen = b.frozen_weights.iter().filter(|&&f| f).count();
            assert_eq!(frozen, a.weights.len());
        }
    }

    #[test]
    fn widen_is_deterministic() {
        let net = init_network(9, 3, 1);
        assert_eq!(widen(&net, WidenMode::Random, 3).unwrap(), widen(&net, WidenMode::Random, 3).unwrap());
    }

    #[test]
    fn widen_needs_hidden_layer() {
        let net = DenseNetwork::with_dims(&[3, 2], 0).unwrap();
        assert!(widen(&net, WidenMode::Random, 0).is_err());
    }

    #[test]
    fn new_params_are_small() {
        let net = init_network(9, 3, 1);
        let w = widen(&net, WidenMode::Random, 9).unwrap();
        for l in w.layers() {
            let lim = NEW_PARAM_SCALE * xavier_limit(l.n_in, l.n_out);
            for (p, f) in l.weights.iter().zip(&l.frozen_weights) {
                if !f {
                    assert!(p.abs() <= lim);
                }
            }
        }
    }

    #[test]
    fn five_widens_then_deepen() {
        let mut net = init_network(9, 3, 1);
        for s in 0..5 {
            net = widen(&net, WidenMode::Random, s).unwrap();
            net.clear_frozen();
        }
        assert_eq!(net.hidden_widths(), vec![10, 10]);
        let d = deepen(&net, DeepenMode::Random, 99).unwrap();
        assert_eq!(d.hidden_widths(), vec![10, 10, 10]);
        assert_eq!(d.architecture(), "9-10-10-10-3");
        let fresh = &d.layers()[2];
        assert!(fresh.frozen_weights.iter().all(|f| !f));
        assert!(fresh.biases.iter().all(|&b| b == 0.0));
        assert!(d.layers()[3].frozen_weights.iter().all(|&f| f));
    }

    #[test]
    fn growth_cadence() {
        let seq: String = (1..=6).map(|e| growth_kind(e, 5).letter()).collect();
        assert_eq!(seq, "WWWWDW");
        assert_eq!(growth_kind(1, 1), GrowthKind::Deepen);
    }

    #[test]
    fn near_identity_deepen_is_close() {
        // Inputs kept small so that hidden activations stay within ±0.1.
        let net = DenseNetwork::with_dims(&[4, 5, 5, 2], 11).unwrap();
        let d = deepen(&net, DeepenMode::NearIdentity, 5).unwrap();
        let noise = IDENTITY_NOISE_SCALE * xavier_limit(5, 5);
        let out = &net.layers()[2];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-0.05..0.05)).collect();
            let (y0, cache) = net.forward(&x).unwrap();
            let h = &cache.post[1];
            let hmax = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(hmax <= 0.1);
            let y1 = d.predict(&x).unwrap();
            // |h' − h| ≤ Σ|noise|·|h| + |h|³/3 per component, mapped through W_out.
            let dh = 5.0 * noise * hmax + hmax.powi(3) / 3.0;
            for (i, (a, b)) in y0.iter().zip(&y1).enumerate() {
                let row: f64 = (0..5).map(|j| out.w(i, j).abs()).sum();
                assert!((a - b).abs() <= row * dh + 1e-15);
                assert!((a - b).abs() <= 1e-3 + hmax.powi(3) / 3.0 * row.max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn function_preserving_widen_is_exact(seed in 0u64..500, xs in proptest::collection::vec(-3.0f64..3.0, 4)) {
            let mut net = DenseNetwork::with_dims(&[4, 3, 6, 2], seed).unwrap();
            for l in net.layers_mut() {
                for (i, b) in l.biases.iter_mut().enumerate() {
                    *b = 0.1 * (i as f64 - 1.0);
                }
            }
            let w = widen(&net, WidenMode::FunctionPreserving, seed + 1).unwrap();
            prop_assert_eq!(net.predict(&xs).unwrap(), w.predict(&xs).unwrap());
        }

        #[test]
        fn growth_is_monotone(seed in 0u64..200, deep in proptest::bool::ANY) {
            let net = init_network(5, 1, seed);
            let g = if deep {
                deepen(&net, DeepenMode::Random, seed).unwrap()
            } else {
                widen(&net, WidenMode::Random, seed).unwrap()
            };
            prop_assert!(g.param_count() > net.param_count());
            prop_assert!(g.layers().len() >= net.layers().len());
            for (a, b) in net.hidden_widths().iter().zip(g.hidden_widths()) {
                prop_assert!(b >= *a);
            }
        }
    }
}
