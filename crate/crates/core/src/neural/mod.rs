//! Attention-based actor-critic network, written out by hand.
//!
//! Each pedestrian's state is joined with the robot's and embedded by `mlp1`.
//! `mlp3` scores every embedding against the crowd mean, a softmax over the
//! scores weights the `mlp2` interaction vectors, and `mlp4` maps the robot
//! state plus the weighted crowd vector to shared features for the policy
//! (81 logits) and value heads.
//!
//! All parameters live in one flat `Vec<f64>`; [`LAYERS`] fixes the order,
//! which is also the checkpoint order.

mod adam;
mod checkpoint;
mod network;

use rand::Rng;

use crate::env::NUM_ACTIONS;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use network::{
    backward, backward_into, encode_observation, forward, ForwardTrace, MlpCache, ROBOT_DIM,
    PED_DIM, PAIR_DIM,
};

/// Output width of `mlp1` (pedestrian embedding).
pub const EMBED_DIM: usize = 100;
/// Output width of `mlp2` (interaction vector).
pub const INTERACTION_DIM: usize = 50;
pub const FEATURE_DIM: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub name: &'static str,
    pub inputs: usize,
    pub outputs: usize,
    pub relu: bool,
}

const fn layer(name: &'static str, inputs: usize, outputs: usize, relu: bool) -> LayerSpec {
    LayerSpec { name, inputs, outputs, relu }
}

pub const LAYERS: [LayerSpec; 12] = [
    layer("mlp1.0", 14, 150, true),
    layer("mlp1.1", 150, 100, true),
    layer("mlp2.0", 100, 100, true),
    layer("mlp2.1", 100, 50, false),
    layer("mlp3.0", 200, 100, true),
    layer("mlp3.1", 100, 100, true),
    layer("mlp3.2", 100, 1, false),
    layer("mlp4.0", 59, 150, true),
    layer("mlp4.1", 150, 100, true),
    layer("mlp4.2", 100, 100, true),
    layer("policy", 100, NUM_ACTIONS, false),
    layer("value", 100, 1, false),
];

/// Index ranges of each sub-network within [`LAYERS`].
pub(crate) mod blocks {
    use std::ops::Range;
    pub const MLP1: Range<usize> = 0..2;
    pub const MLP2: Range<usize> = 2..4;
    pub const MLP3: Range<usize> = 4..7;
    pub const MLP4: Range<usize> = 7..10;
    pub const POLICY: usize = 10;
    pub const VALUE: usize = 11;
}

/// Offsets of one layer's weight (row-major `outputs x inputs`) and bias.
#[derive(Debug, Clone, Copy)]
pub struct LayerOffsets {
    pub weight: usize,
    pub bias: usize,
}

fn offsets() -> &'static [LayerOffsets; 12] {
    use std::sync::OnceLock;
    static OFFSETS: OnceLock<[LayerOffsets; 12]> = OnceLock::new();
    OFFSETS.get_or_init(|| {
        let mut at = 0;
        std::array::from_fn(|i| {
            let l = LAYERS[i];
            let weight = at;
            let bias = weight + l.inputs * l.outputs;
            at = bias + l.outputs;
            LayerOffsets { weight, bias }
        })
    })
}

pub fn param_count() -> usize {
    LAYERS.iter().map(|l| l.inputs * l.outputs + l.outputs).sum()
}

/// Every weight and bias of the network, flattened in [`LAYERS`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    data: Vec<f64>,
}

impl PolicyParams {
    pub fn zeros() -> Self {
        Self { data: vec![0.0; param_count()] }
    }

    pub fn from_flat(data: Vec<f64>) -> Option<Self> {
        (data.len() == param_count()).then_some(Self { data })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn weight(&self, layer: usize) -> &[f64] {
        let l = LAYERS[layer];
        let o = offsets()[layer].weight;
        &self.data[o..o + l.inputs * l.outputs]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let o = offsets()[layer].bias;
        &self.data[o..o + LAYERS[layer].outputs]
    }

    pub(crate) fn layer_mut(&mut self, layer: usize) -> (&mut [f64], &mut [f64]) {
        let l = LAYERS[layer];
        let o = offsets()[layer];
        let (w, rest) = self.data[o.weight..].split_at_mut(l.inputs * l.outputs);
        (w, &mut rest[..l.outputs])
    }

    /// `(name, shape, values)` for each tensor, weights before biases.
    pub fn tensors(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut out = Vec::with_capacity(2 * LAYERS.len());
        for (i, l) in LAYERS.iter().enumerate() {
            out.push((format!("{}.weight", l.name), vec![l.outputs, l.inputs], self.weight(i)));
            out.push((format!("{}.bias", l.name), vec![l.outputs], self.bias(i)));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn add_assign(&mut self, other: &PolicyParams) {
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }
}

/// Gradients share the parameter layout.
pub type Gradients = PolicyParams;

/// Glorot-uniform weights, zero biases.
pub fn init_params<R: Rng + ?Sized>(rng: &mut R) -> PolicyParams {
    let mut p = PolicyParams::zeros();
    for (i, l) in LAYERS.iter().enumerate() {
        let limit = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
        let (w, _) = p.layer_mut(i);
        for v in w.iter_mut() {
            *v = rng.gen_range(-limit..limit);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn shapes_and_count() {
        let expected = [
            (14, 150),
            (150, 100),
            (100, 100),
            (100, 50),
            (200, 100),
            (100, 100),
            (100, 1),
            (59, 150),
            (150, 100),
            (100, 100),
            (100, 81),
            (100, 1),
        ];
        for (l, (i, o)) in LAYERS.iter().zip(expected) {
            assert_eq!((l.inputs, l.outputs), (i, o), "{}", l.name);
        }
        assert_eq!(param_count(), 105_283);
        assert!(param_count() < 120_000);
    }

    #[test]
    fn init_is_seeded_with_zero_biases() {
        let a = init_params(&mut rng_for(5, &[]));
        let b = init_params(&mut rng_for(5, &[]));
        assert_eq!(a, b);
        for i in 0..LAYERS.len() {
            assert!(a.bias(i).iter().all(|&v| v == 0.0));
            let l = LAYERS[i];
            let limit = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            assert!(a.weight(i).iter().all(|v| v.abs() < limit));
        }
    }
}
